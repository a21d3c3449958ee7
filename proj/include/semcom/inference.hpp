#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semcom/framework.hpp"
#include "semcom/metrics.hpp"

namespace semcom {

struct NeuralRun {
    std::vector<std::string> hypotheses;  // detokenized greedy decodes
    metrics::NmseAccumulator nmse;        // X against the decoder input
};

// Encodes, transmits and decodes `sentences` (content ids) in fixed-order batches.
// Batch k draws its channel from derive_seed(seed, k). Inference mode, no grad.
NeuralRun run_neural(SemComModel& model, Framework framework, const text::Vocabulary& vocab,
                     const std::vector<std::vector<int>>& sentences, const LinkConfig& link,
                     std::uint64_t seed, int batch_size, int max_len);

}  // namespace semcom
