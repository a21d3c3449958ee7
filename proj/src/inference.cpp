#include "semcom/inference.hpp"

#include <torch/torch.h>

#include "semcom/errors.hpp"
#include "semcom/seed.hpp"

namespace semcom {

NeuralRun run_neural(SemComModel& model, Framework framework, const text::Vocabulary& vocab,
                     const std::vector<std::vector<int>>& sentences, const LinkConfig& link,
                     std::uint64_t seed, int batch_size, int max_len) {
    if (!is_neural(framework)) throw ConfigError("run_neural: " + to_string(framework) + " is not a neural framework");
    if (batch_size < 1) throw ConfigError("run_neural: batch_size must be >= 1");
    torch::NoGradGuard no_grad;
    NeuralRun out;
    out.hypotheses.reserve(sentences.size());
    const auto bs = static_cast<std::size_t>(batch_size);
    for (std::size_t start = 0, k = 0; start < sentences.size(); start += bs, ++k) {
        const auto end = std::min(sentences.size(), start + bs);
        std::vector<std::vector<int>> rows(sentences.begin() + static_cast<std::ptrdiff_t>(start),
                                           sentences.begin() + static_cast<std::ptrdiff_t>(end));
        auto batch = text::SentenceBatch::from_content(rows);
        auto x = model.aedm->encode(batch);
        auto link_out = pass_link(x, link, derive_seed(seed, k));
        auto dec_in = link_out.decoder_input;
        if (has_suppressor(framework)) dec_in = gsdsm::suppress(dec_in, model.generator);
        out.nmse.add(x.values, dec_in.values);
        auto decoded = model.aedm->greedy_decode(dec_in, max_len);
        for (const auto& ids : decoded.content()) out.hypotheses.push_back(text::detokenize(ids, vocab));
    }
    return out;
}

}  // namespace semcom
