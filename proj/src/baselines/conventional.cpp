#include "semcom/baselines/conventional.hpp"

#include <ATen/ATen.h>

#include "semcom/baselines/qam.hpp"
#include "semcom/errors.hpp"
#include "semcom/seed.hpp"

namespace semcom::baselines {

namespace {

at::Tensor to_tensor(const std::vector<Symbol>& symbols) {
    auto t = at::empty({1, static_cast<std::int64_t>(symbols.size()), 1, 2}, at::kDouble);
    auto acc = t.accessor<double, 4>();
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        acc[0][static_cast<std::int64_t>(i)][0][0] = symbols[i].real();
        acc[0][static_cast<std::int64_t>(i)][0][1] = symbols[i].imag();
    }
    return t;
}

std::vector<Symbol> from_tensor(const at::Tensor& t) {
    auto c = t.contiguous();
    auto acc = c.accessor<double, 4>();
    std::vector<Symbol> out(static_cast<std::size_t>(c.size(1)));
    for (std::int64_t i = 0; i < c.size(1); ++i) out[static_cast<std::size_t>(i)] = {acc[0][i][0][0], acc[0][i][0][1]};
    return out;
}

}  // namespace

ConventionalSentence run_conventional_sentence(const std::string& sentence,
                                               const SourceCodec& codec,
                                               const ConventionalLink& link, std::uint64_t seed) {
    ConventionalSentence out;
    const Bits source = codec.encode(sentence);
    out.n_bits = source.size();
    if (source.empty()) return out;

    const Bits coded = conv_encode(source, link.conv);
    const auto symbols = qam16_modulate(coded);
    out.n_symbols = symbols.size();

    auto realization = channel::make_realization(link.fading, 1, link.snr_db.value_or(0.0), seed,
                                                 at::kDouble);
    if (!link.snr_db) realization.sigma2 = 0.0;
    SymbolBlock y = channel::transmit(SymbolBlock{to_tensor(symbols), {}}, realization);
    if (link.use_csi) {
        try {
            y = channel::equalize(y, realization.h);
        } catch (const DegenerateChannelError&) {
            // Deep fade: the frame is lost.
            out.truncated = true;
            out.bit_errors = source.size();
            return out;
        }
    }

    Bits received = qam16_demodulate(from_tensor(y.values));
    received.resize(coded.size());  // drop modulation padding
    Bits decoded = viterbi_decode(received, link.conv);

    const std::size_t common = std::min(decoded.size(), source.size());
    for (std::size_t i = 0; i < common; ++i) out.bit_errors += (decoded[i] != source[i]);
    out.bit_errors += std::max(decoded.size(), source.size()) - common;

    auto text = codec.decode_prefix(decoded);
    out.text = std::move(text.text);
    out.truncated = text.truncated;
    return out;
}

std::vector<ConventionalSentence> run_conventional(const std::vector<std::string>& sentences,
                                                   const SourceCodec& codec,
                                                   const ConventionalLink& link,
                                                   std::uint64_t seed) {
    std::vector<ConventionalSentence> out;
    out.reserve(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i)
        out.push_back(run_conventional_sentence(sentences[i], codec, link, derive_seed(seed, i)));
    return out;
}

}  // namespace semcom::baselines
