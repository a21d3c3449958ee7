#include <array>
#include <span>

#include "semcom/seed.hpp"
#include "semcom/textcorpus.hpp"

namespace semcom::text {

namespace {

using Words = std::span<const std::string_view>;

constexpr std::array<std::string_view, 24> kSubjects = {
    "the commission", "the council", "the parliament", "the committee", "the rapporteur",
    "the presidency", "the member states", "the union", "this house", "the government",
    "our group", "the european court", "the minister", "the citizens", "the industry",
    "the agency", "the delegation", "the commissioner", "the regions", "the authorities",
    "the budget committee", "the european people", "many colleagues", "the social partners"};

constexpr std::array<std::string_view, 30> kVerbs = {
    "supports", "rejects", "welcomes", "proposes", "adopts", "examines", "considers",
    "needs", "requires", "presents", "debates", "approves", "opposes", "defends",
    "improves", "reviews", "recognises", "strengthens", "calls for", "insists on",
    "agrees with", "votes for", "votes against", "asks for", "reports on", "focuses on",
    "depends on", "refers to", "deals with", "stands by"};

constexpr std::array<std::string_view, 40> kObjects = {
    "the proposal", "the report", "the amendment", "the directive", "the regulation",
    "the budget", "the agreement", "the resolution", "the programme", "the strategy",
    "the framework", "the policy", "the treaty", "the motion", "the decision",
    "the compromise", "the recommendation", "the position", "the initiative", "the measures",
    "the common position", "the action plan", "the annual report", "the draft budget",
    "the energy policy", "the fisheries policy", "the internal market", "human rights",
    "the environment", "public health", "consumer protection", "the single currency",
    "the enlargement process", "the transport sector", "food safety", "employment",
    "regional development", "the research programme", "climate change", "the legal basis"};

constexpr std::array<std::string_view, 24> kModifiers = {
    "today", "in this house", "with great interest", "without delay", "in principle",
    "once again", "at this stage", "in the long term", "for the first time", "very clearly",
    "on behalf of my group", "in the coming years", "as soon as possible", "in full",
    "in good faith", "at first reading", "at second reading", "in this respect",
    "in the member states", "at european level", "in the committee", "this week",
    "with some reservations", "by a large majority"};

constexpr std::array<std::string_view, 8> kOpeners = {
    "mr president", "madam president", "ladies and gentlemen", "i believe that",
    "we know that", "it is clear that", "i must say that", "let me say that"};

constexpr std::array<std::string_view, 6> kJoiners = {"and", "but", "because", "while",
                                                      "although", "so"};

constexpr std::array<std::string_view, 12> kAdjectives = {
    "important", "necessary", "essential", "difficult", "clear", "urgent",
    "balanced", "ambitious", "fair", "good", "serious", "acceptable"};

std::string_view pick(SplitMix& rng, Words words) {
    // Squared uniform skews toward the head of each list, giving a Zipf-like profile.
    const double u = rng.uniform();
    return words[static_cast<std::size_t>(u * u * static_cast<double>(words.size()))];
}

void append(std::string& out, std::string_view w) {
    if (!out.empty()) out.push_back(' ');
    out += w;
}

void clause(SplitMix& rng, std::string& out) {
    append(out, pick(rng, kSubjects));
    if (rng.below(4) == 0) {
        append(out, "is");
        append(out, pick(rng, kAdjectives));
        append(out, "for");
        append(out, pick(rng, kObjects));
        return;
    }
    append(out, pick(rng, kVerbs));
    append(out, pick(rng, kObjects));
    if (rng.below(2) == 0) append(out, pick(rng, kModifiers));
}

}  // namespace

std::vector<std::string> synthesize_corpus(std::size_t n_sentences, std::uint64_t seed) {
    SplitMix rng(derive_seed(seed, 0xC0AB05));
    std::vector<std::string> out;
    out.reserve(n_sentences);
    while (out.size() < n_sentences) {
        std::string s;
        if (rng.below(4) == 0) append(s, pick(rng, kOpeners));
        clause(rng, s);
        const auto extra = rng.below(3);
        for (std::uint64_t i = 0; i < extra && rng.below(2) == 0; ++i) {
            append(s, pick(rng, kJoiners));
            clause(rng, s);
        }
        if (in_length_band(tokenize(s).size(), CorpusConfig{})) out.push_back(std::move(s));
    }
    return out;
}

}  // namespace semcom::text
