#include <fstream>
#include <numeric>

#include <ATen/ATen.h>

#include "semcom/errors.hpp"
#include "semcom/seed.hpp"
#include "semcom/textcorpus.hpp"

namespace semcom::text {

namespace {

template <class T>
void fisher_yates(std::vector<T>& v, std::uint64_t seed) {
    SplitMix rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read corpus " + path.string());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }
    if (in.bad()) throw IoError("error while reading " + path.string());
    return lines;
}

std::vector<std::vector<std::string>> load_filtered(const std::filesystem::path& path,
                                                    const CorpusConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<std::string>> out;
    for (const auto& line : read_lines(path)) {
        auto toks = tokenize(line);
        if (!in_length_band(toks.size(), cfg)) continue;
        out.push_back(std::move(toks));
        if (out.size() >= cfg.max_sentences) break;
    }
    return out;
}

Vocabulary build_vocabulary(const std::filesystem::path& corpus_path, const CorpusConfig& cfg) {
    auto sentences = load_filtered(corpus_path, cfg);
    if (sentences.empty())
        throw EmptyCorpusError("no sentences of " + std::to_string(cfg.min_len) + "-" +
                               std::to_string(cfg.max_len) + " tokens in " + corpus_path.string());
    return Vocabulary::from_sentences(sentences, cfg.vocab_cap);
}

std::pair<std::vector<std::vector<std::string>>, std::vector<std::vector<std::string>>>
split_corpus(std::vector<std::vector<std::string>> sentences, double train_fraction,
             std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train_fraction must lie in (0, 1)");
    fisher_yates(sentences, derive_seed(seed, 0x5971));
    auto n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(sentences.size()));
    if (sentences.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, sentences.size() - 1);
    std::vector<std::vector<std::string>> test(std::make_move_iterator(sentences.begin() + n_train),
                                               std::make_move_iterator(sentences.end()));
    sentences.resize(n_train);
    return {std::move(sentences), std::move(test)};
}

SentenceBatch SentenceBatch::from_content(const std::vector<std::vector<int>>& content) {
    if (content.empty()) throw ShapeError("empty sentence batch");
    std::size_t longest = 0;
    for (const auto& s : content) longest = std::max(longest, s.size());
    const auto rows = static_cast<std::int64_t>(content.size());
    const auto cols = static_cast<std::int64_t>(longest + 2);

    auto ids = at::zeros({rows, cols}, at::kLong);
    auto acc = ids.accessor<std::int64_t, 2>();
    SentenceBatch b;
    b.lengths.reserve(content.size());
    for (std::int64_t r = 0; r < rows; ++r) {
        const auto& s = content[static_cast<std::size_t>(r)];
        acc[r][0] = Vocabulary::kStart;
        for (std::size_t k = 0; k < s.size(); ++k) acc[r][static_cast<std::int64_t>(k) + 1] = s[k];
        acc[r][static_cast<std::int64_t>(s.size()) + 1] = Vocabulary::kEnd;
        b.lengths.push_back(static_cast<std::int64_t>(s.size()));
    }
    b.pad_mask = ids.ne(Vocabulary::kPad);
    b.ids = std::move(ids);
    return b;
}

std::vector<std::vector<int>> SentenceBatch::content() const {
    auto cpu = ids.to(at::kCPU).contiguous();
    auto acc = cpu.accessor<std::int64_t, 2>();
    std::vector<std::vector<int>> out(static_cast<std::size_t>(cpu.size(0)));
    for (std::int64_t r = 0; r < cpu.size(0); ++r) {
        for (std::int64_t k = 0; k < cpu.size(1); ++k) {
            const auto id = static_cast<int>(acc[r][k]);
            if (id == Vocabulary::kEnd) break;
            if (id == Vocabulary::kStart || id == Vocabulary::kPad) continue;
            out[static_cast<std::size_t>(r)].push_back(id);
        }
    }
    return out;
}

BatchStream::BatchStream(std::vector<std::vector<int>> sentences, int batch_size,
                         std::uint64_t seed, bool shuffle)
    : sentences_(std::move(sentences)), batch_size_(batch_size), shuffle_(shuffle) {
    if (batch_size <= 0) throw ConfigError("batch_size must be >= 1");
    reset(seed);
}

void BatchStream::reset(std::uint64_t seed) {
    order_.resize(sentences_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (shuffle_) fisher_yates(order_, seed);
    cursor_ = 0;
}

std::size_t BatchStream::num_batches() const {
    const auto b = static_cast<std::size_t>(batch_size_);
    return (sentences_.size() + b - 1) / b;
}

std::optional<SentenceBatch> BatchStream::next() {
    if (cursor_ >= order_.size()) return std::nullopt;
    const auto end = std::min(order_.size(), cursor_ + static_cast<std::size_t>(batch_size_));
    std::vector<std::vector<int>> rows;
    rows.reserve(end - cursor_);
    for (; cursor_ < end; ++cursor_) rows.push_back(sentences_[order_[cursor_]]);
    return SentenceBatch::from_content(rows);
}

BatchStream batch_sentences(const std::filesystem::path& corpus_path, const Vocabulary& vocab,
                            int batch_size, std::uint64_t seed, const CorpusConfig& cfg) {
    if (batch_size <= 0) throw ConfigError("batch_size must be >= 1");
    std::vector<std::vector<int>> encoded;
    for (const auto& toks : load_filtered(corpus_path, cfg)) encoded.push_back(vocab.encode(toks));
    return BatchStream(std::move(encoded), batch_size, seed);
}

}  // namespace semcom::text
