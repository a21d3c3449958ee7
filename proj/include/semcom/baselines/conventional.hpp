#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semcom/baselines/bits.hpp"
#include "semcom/baselines/convcode.hpp"
#include "semcom/channel.hpp"

namespace semcom::baselines {

struct ConventionalLink {
    bool use_csi = true;  // perfect-CSI zero-forcing before demodulation
    channel::FadingSpec fading;
    std::optional<double> snr_db;  // nullopt: noiseless
    ConvCodeConfig conv;
};

struct ConventionalSentence {
    std::string text;
    bool truncated = false;  // undecodable tail dropped
    std::size_t n_symbols = 0;
    std::size_t n_bits = 0;  // source bits sent
    std::size_t bit_errors = 0;
};

// One sentence per frame: source encode -> convolutional encode -> 16-QAM ->
// block-fading channel -> (equalize) -> demodulate -> Viterbi -> source decode.
// Sentence i draws its channel from derive_seed(seed, i), so results do not
// depend on how sentences are partitioned across workers.
ConventionalSentence run_conventional_sentence(const std::string& sentence,
                                               const SourceCodec& codec,
                                               const ConventionalLink& link, std::uint64_t seed);

std::vector<ConventionalSentence> run_conventional(const std::vector<std::string>& sentences,
                                                   const SourceCodec& codec,
                                                   const ConventionalLink& link,
                                                   std::uint64_t seed);

}  // namespace semcom::baselines
