#pragma once

#include <cstdint>
#include <vector>

#include "semcom/baselines/bits.hpp"

namespace semcom::baselines {

struct ConvCodeConfig {
    int constraint_length = 7;
    std::vector<std::uint32_t> generators = {0133, 0171};  // octal
    int traceback = 35;  // decision depth; >= 5 * constraint_length

    int memory() const { return constraint_length - 1; }
    void validate() const;
};

// Feedforward encoder with zero-tail termination:
// output length = n_generators * (len + constraint_length - 1).
Bits conv_encode(const Bits& bits, const ConvCodeConfig& cfg = {});

// Hard-decision Viterbi decoder (Hamming branch metric) with sliding-window
// decisions of depth cfg.traceback; the final window is resolved from the
// zero tail state. Returns the information bits (tail removed).
Bits viterbi_decode(const Bits& coded, const ConvCodeConfig& cfg = {});

}  // namespace semcom::baselines
