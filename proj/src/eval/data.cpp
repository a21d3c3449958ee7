#include "semcom/eval/data.hpp"

#include <fstream>
#include <sstream>

#include "semcom/errors.hpp"

namespace semcom::eval {

PreparedData prepare_data(const std::vector<std::string>& lines, const text::CorpusConfig& cfg) {
    cfg.validate();
    Sentences kept;
    for (const auto& line : lines) {
        auto toks = text::tokenize(line);
        if (!text::in_length_band(toks.size(), cfg)) continue;
        kept.push_back(std::move(toks));
        if (kept.size() >= cfg.max_sentences) break;
    }
    if (kept.size() < 2)
        throw EmptyCorpusError("need at least two sentences of " + std::to_string(cfg.min_len) + "-" +
                               std::to_string(cfg.max_len) + " tokens");
    auto [train, test] = text::split_corpus(std::move(kept), cfg.train_fraction, cfg.seed);
    auto vocab = text::Vocabulary::from_sentences(train, cfg.vocab_cap);
    return {std::move(vocab), std::move(train), std::move(test)};
}

Sentences read_tokenized(const std::filesystem::path& path) {
    Sentences out;
    for (const auto& line : text::read_lines(path)) {
        std::istringstream in(line);
        std::vector<std::string> toks;
        for (std::string t; in >> t;) toks.push_back(t);
        if (!toks.empty()) out.push_back(std::move(toks));
    }
    return out;
}

void write_tokenized(const std::filesystem::path& path, const Sentences& sentences) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& s : sentences) out << text::join_tokens(s) << '\n';
}

void save_prepared(const std::filesystem::path& dir, const PreparedData& data) {
    std::filesystem::create_directories(dir);
    write_tokenized(dir / "train.txt", data.train);
    write_tokenized(dir / "test.txt", data.test);
    data.vocab.save(dir / "vocab.json");
}

PreparedData load_prepared(const std::filesystem::path& dir) {
    PreparedData d{text::Vocabulary::load(dir / "vocab.json"), read_tokenized(dir / "train.txt"),
                   read_tokenized(dir / "test.txt")};
    if (d.train.empty()) throw EmptyCorpusError("no training sentences in " + dir.string());
    return d;
}

std::vector<std::string> joined(const Sentences& sentences) {
    std::vector<std::string> out;
    out.reserve(sentences.size());
    for (const auto& s : sentences) out.push_back(text::join_tokens(s));
    return out;
}

}  // namespace semcom::eval
