#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace semcom::eval {

struct TsneConfig {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 250;
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kTsneMaxPoints = 5000;

// Exact O(n^2) t-SNE to two dimensions. Rows of `points` must share one length.
// The perplexity is lowered to (n - 1) / 3 when there are too few points.
std::vector<std::array<double, 2>> tsne(const std::vector<std::vector<double>>& points,
                                        const TsneConfig& cfg);

}  // namespace semcom::eval
