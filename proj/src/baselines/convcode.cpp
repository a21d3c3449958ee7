#include "semcom/baselines/convcode.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "semcom/errors.hpp"

namespace semcom::baselines {

void ConvCodeConfig::validate() const {
    if (constraint_length < 2 || constraint_length > 16)
        throw ConfigError("convolutional code: constraint length must lie in [2, 16]");
    if (generators.empty()) throw ConfigError("convolutional code: no generator polynomials");
    for (auto g : generators) {
        if (g == 0) throw ConfigError("convolutional code: generator polynomial is zero");
        if (g >> constraint_length) throw ConfigError("convolutional code: generator wider than K");
    }
    if (traceback < 5 * constraint_length)
        throw ConfigError("convolutional code: traceback must be >= 5 * constraint_length");
}

namespace {

// Register layout: bit (K-1) is the newest input, bits K-2..0 the older ones.
// The state is the K-1 most recent inputs, i.e. register >> 1.
std::uint32_t branch_output(std::uint32_t reg, const ConvCodeConfig& cfg) {
    std::uint32_t out = 0;
    for (auto g : cfg.generators) out = (out << 1) | (std::popcount(reg & g) & 1U);
    return out;
}

}  // namespace

Bits conv_encode(const Bits& bits, const ConvCodeConfig& cfg) {
    cfg.validate();
    const int k = cfg.constraint_length;
    const auto n_out = static_cast<int>(cfg.generators.size());
    Bits out;
    out.reserve(static_cast<std::size_t>(n_out) * (bits.size() + static_cast<std::size_t>(cfg.memory())));
    std::uint32_t state = 0;
    auto push = [&](std::uint32_t in) {
        const std::uint32_t reg = (in << (k - 1)) | state;
        const auto o = branch_output(reg, cfg);
        for (int i = n_out - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((o >> i) & 1U));
        state = reg >> 1;
    };
    for (auto b : bits) push(b & 1U);
    for (int i = 0; i < cfg.memory(); ++i) push(0);
    return out;
}

Bits viterbi_decode(const Bits& coded, const ConvCodeConfig& cfg) {
    cfg.validate();
    const int k = cfg.constraint_length;
    const auto n_out = static_cast<std::size_t>(cfg.generators.size());
    const std::size_t n_states = std::size_t{1} << cfg.memory();
    const std::size_t steps = coded.size() / n_out;
    if (steps < static_cast<std::size_t>(cfg.memory())) return {};
    const std::size_t n_info = steps - static_cast<std::size_t>(cfg.memory());

    std::vector<std::uint32_t> outputs(2 * n_states);
    for (std::uint32_t s = 0; s < n_states; ++s)
        for (std::uint32_t in = 0; in < 2; ++in)
            outputs[2 * s + in] = branch_output((in << (k - 1)) | s, cfg);

    constexpr int kInf = std::numeric_limits<int>::max() / 2;
    std::vector<int> metric(n_states, kInf), next(n_states);
    metric[0] = 0;
    // survivors[t][s] = predecessor state of s at step t (the input bit is recoverable
    // as the top bit of s).
    std::vector<std::vector<std::uint32_t>> survivors(steps, std::vector<std::uint32_t>(n_states));
    Bits decoded(n_info, 0);

    auto trace = [&](std::size_t t_end, std::uint32_t state, std::size_t first, std::size_t last) {
        // Walk back from step t_end (inclusive) writing decisions for steps in [first, last].
        for (std::size_t t = t_end + 1; t-- > 0;) {
            if (t >= first && t <= last && t < n_info)
                decoded[t] = static_cast<std::uint8_t>((state >> (k - 2)) & 1U);
            if (t == first) break;
            state = survivors[t][state];
        }
    };

    const auto depth = static_cast<std::size_t>(cfg.traceback);
    for (std::size_t t = 0; t < steps; ++t) {
        std::uint32_t received = 0;
        for (std::size_t i = 0; i < n_out; ++i) received = (received << 1) | (coded[t * n_out + i] & 1U);
        std::fill(next.begin(), next.end(), kInf);
        const bool tail = t >= n_info;
        for (std::uint32_t s = 0; s < n_states; ++s) {
            if (metric[s] >= kInf) continue;
            for (std::uint32_t in = 0; in < (tail ? 1U : 2U); ++in) {
                const std::uint32_t ns = ((in << (k - 1)) | s) >> 1;
                const int m = metric[s] + std::popcount(outputs[2 * s + in] ^ received);
                if (m < next[ns] || (m == next[ns] && s < survivors[t][ns])) {
                    next[ns] = m;
                    survivors[t][ns] = s;
                }
            }
        }
        metric.swap(next);
        if (t + 1 > depth && t + 1 < steps) {
            const std::size_t decide = t + 1 - depth - 1;
            if (decide < n_info) {
                const auto best = static_cast<std::uint32_t>(
                    std::min_element(metric.begin(), metric.end()) - metric.begin());
                trace(t, best, decide, decide);
            }
        }
    }
    // Flush: the zero tail forces the final state to 0.
    const std::size_t first_open = steps > depth + 1 ? steps - depth - 1 : 0;
    if (steps > 0) trace(steps - 1, 0, first_open, n_info == 0 ? 0 : n_info - 1);
    return decoded;
}

}  // namespace semcom::baselines
