#include "semcom/textcorpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include <json.hpp>

#include "semcom/errors.hpp"

namespace semcom::text {

namespace {

constexpr std::string_view kSpecialText[Vocabulary::kNumSpecials] = {"<pad>", "<start>", "<end>",
                                                                     "<unk>"};
constexpr int kVocabFormat = 1;

}  // namespace

void CorpusConfig::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("corpus.train_fraction must lie in (0, 1)");
    if (min_len < 1 || min_len > max_len)
        throw ConfigError("corpus.min_len must satisfy 1 <= min_len <= max_len");
    if (vocab_cap < 1) throw ConfigError("corpus.vocab_cap must be >= 1");
    if (max_sentences < 1) throw ConfigError("corpus.max_sentences must be >= 1");
}

std::vector<std::string> tokenize(std::string_view sentence) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
    };
    for (char raw : sentence) {
        const auto c = static_cast<unsigned char>(raw);
        if (c < 0x80 && std::isspace(c)) {
            flush();
        } else if (c < 0x80 && std::ispunct(c)) {
            flush();
            out.emplace_back(1, static_cast<char>(c));
        } else {
            cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : raw);
        }
    }
    flush();
    return out;
}

bool in_length_band(std::size_t n_tokens, const CorpusConfig& cfg) {
    return n_tokens >= static_cast<std::size_t>(cfg.min_len) &&
           n_tokens <= static_cast<std::size_t>(cfg.max_len);
}

Vocabulary::Vocabulary() {
    for (auto s : kSpecialText) add(std::string(s));
}

void Vocabulary::add(std::string token) {
    const int id = static_cast<int>(id_to_token_.size());
    token_to_id_.emplace(token, id);
    id_to_token_.push_back(std::move(token));
}

Vocabulary Vocabulary::from_sentences(const std::vector<std::vector<std::string>>& sentences,
                                      std::size_t vocab_cap) {
    std::map<std::string, std::size_t> counts;
    for (const auto& s : sentences)
        for (const auto& t : s) ++counts[t];

    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    // std::map iteration is already lexicographic; stable_sort keeps that order on ties.
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    Vocabulary v;
    for (const auto& [tok, n] : ranked) {
        if (v.size() - kNumSpecials >= vocab_cap) break;
        if (v.contains(tok)) continue;  // literal "<unk>" etc. in the corpus
        v.add(tok);
    }
    return v;
}

int Vocabulary::id(std::string_view token) const {
    auto it = token_to_id_.find(std::string(token));
    return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
    return token_to_id_.contains(std::string(token));
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
        throw RangeError("token id " + std::to_string(id) + " outside vocabulary of size " +
                         std::to_string(id_to_token_.size()));
    return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(id(t));
    return ids;
}

nlohmann::json Vocabulary::to_json() const {
    nlohmann::json specials = nlohmann::json::object();
    for (int i = 0; i < kNumSpecials; ++i) specials[id_to_token_[i]] = i;
    nlohmann::json tokens = nlohmann::json::object();
    for (std::size_t i = kNumSpecials; i < id_to_token_.size(); ++i)
        tokens[id_to_token_[i]] = i;
    return {{"format", kVocabFormat}, {"specials", specials}, {"tokens", tokens}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", 0) != kVocabFormat)
        throw FormatError("vocabulary: missing or unsupported \"format\"");
    const auto& specials = j.at("specials");
    for (int i = 0; i < kNumSpecials; ++i) {
        if (specials.value(std::string(kSpecialText[i]), -1) != i)
            throw FormatError("vocabulary: special token " + std::string(kSpecialText[i]) +
                              " must have id " + std::to_string(i));
    }
    const auto& tokens = j.at("tokens");
    std::vector<std::string> by_id(kNumSpecials + tokens.size());
    for (auto it = tokens.begin(); it != tokens.end(); ++it) {
        const auto id = it.value().get<long long>();
        if (id < kNumSpecials || static_cast<std::size_t>(id) >= by_id.size() ||
            !by_id[static_cast<std::size_t>(id)].empty())
            throw FormatError("vocabulary: ids must be a dense permutation of [4, size)");
        by_id[static_cast<std::size_t>(id)] = it.key();
    }
    Vocabulary v;
    for (std::size_t i = kNumSpecials; i < by_id.size(); ++i) v.add(std::move(by_id[i]));
    return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json().dump(1) << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("vocabulary " + path.string() + ": " + e.what());
    }
}

std::string detokenize(const std::vector<int>& ids, const Vocabulary& vocab) {
    std::string out;
    for (int id : ids) {
        const auto& tok = vocab.token(id);  // range check first
        if (id == Vocabulary::kPad || id == Vocabulary::kStart || id == Vocabulary::kEnd) continue;
        if (!out.empty()) out.push_back(' ');
        out += id == Vocabulary::kUnk ? std::string(Vocabulary::kUnkText) : tok;
    }
    return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

}  // namespace semcom::text
