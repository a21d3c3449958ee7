#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <ATen/Tensor.h>
#include <json.hpp>

namespace semcom::text {

struct CorpusConfig {
    int min_len = 4;
    int max_len = 30;
    double train_fraction = 0.9;
    std::size_t vocab_cap = 20000;
    // Desk-scale cap on the number of filtered sentences kept from a corpus.
    std::size_t max_sentences = 50000;
    std::uint64_t seed = 0;

    void validate() const;
};

// Lowercases ASCII, splits on whitespace and emits every ASCII punctuation
// character as a token of its own.
std::vector<std::string> tokenize(std::string_view sentence);

bool in_length_band(std::size_t n_tokens, const CorpusConfig& cfg);

class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kStart = 1;
    static constexpr int kEnd = 2;
    static constexpr int kUnk = 3;
    static constexpr int kNumSpecials = 4;
    static constexpr std::string_view kUnkText = "<unk>";

    Vocabulary();

    // Keeps the vocab_cap most frequent tokens; ties broken lexicographically.
    static Vocabulary from_sentences(const std::vector<std::vector<std::string>>& sentences,
                                     std::size_t vocab_cap);

    int id(std::string_view token) const;
    const std::string& token(int id) const;
    std::size_t size() const noexcept { return id_to_token_.size(); }
    bool contains(std::string_view token) const;

    std::vector<int> encode(const std::vector<std::string>& tokens) const;

    nlohmann::json to_json() const;
    static Vocabulary from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static Vocabulary load(const std::filesystem::path& path);

    bool operator==(const Vocabulary& other) const { return id_to_token_ == other.id_to_token_; }

private:
    void add(std::string token);

    std::unordered_map<std::string, int> token_to_id_;
    std::vector<std::string> id_to_token_;
};

// Padded batch of sentences. Rows are START w1 .. wn END PAD...; lengths count
// content words only.
struct SentenceBatch {
    at::Tensor ids;       // int64, B x L_max
    at::Tensor pad_mask;  // bool, B x L_max, true on real (non-pad) tokens
    std::vector<std::int64_t> lengths;

    std::int64_t batch_size() const { return ids.size(0); }
    std::int64_t row_length() const { return ids.size(1); }

    // Builds a batch from content-word ids (no specials); pads to the longest row.
    static SentenceBatch from_content(const std::vector<std::vector<int>>& content);
    // Content ids per row (specials removed, stops at END).
    std::vector<std::vector<int>> content() const;
};

std::vector<std::string> read_lines(const std::filesystem::path& path);

// Tokenized sentences of a corpus that fall inside the length band, capped at
// cfg.max_sentences, in file order.
std::vector<std::vector<std::string>> load_filtered(const std::filesystem::path& path,
                                                    const CorpusConfig& cfg);

Vocabulary build_vocabulary(const std::filesystem::path& corpus_path, const CorpusConfig& cfg);

// Deterministic shuffled split into (train, test).
std::pair<std::vector<std::vector<std::string>>, std::vector<std::vector<std::string>>>
split_corpus(std::vector<std::vector<std::string>> sentences, double train_fraction,
             std::uint64_t seed);

// Single-consumer stream of shuffled, padded batches over one pass of the data.
class BatchStream {
public:
    BatchStream(std::vector<std::vector<int>> sentences, int batch_size, std::uint64_t seed,
                bool shuffle = true);

    std::optional<SentenceBatch> next();
    std::size_t num_batches() const;
    void reset(std::uint64_t seed);

private:
    std::vector<std::vector<int>> sentences_;
    std::vector<std::size_t> order_;
    int batch_size_;
    bool shuffle_;
    std::size_t cursor_ = 0;
};

BatchStream batch_sentences(const std::filesystem::path& corpus_path, const Vocabulary& vocab,
                            int batch_size, std::uint64_t seed,
                            const CorpusConfig& cfg = CorpusConfig{});

// Specials are dropped, UNK renders as "<unk>"; words are joined by single spaces.
std::string detokenize(const std::vector<int>& ids, const Vocabulary& vocab);

std::string join_tokens(const std::vector<std::string>& tokens);

// Deterministic English-like sentences (parliamentary register) for tests and
// desk-scale runs when no real corpus is at hand.
std::vector<std::string> synthesize_corpus(std::size_t n_sentences, std::uint64_t seed);

}  // namespace semcom::text
