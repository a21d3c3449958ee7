#include "doctest_torch.hpp"

#include <cmath>
#include <random>

#include "semcom/baselines/conventional.hpp"
#include "semcom/baselines/convcode.hpp"
#include "semcom/baselines/fixed5.hpp"
#include "semcom/baselines/huffman.hpp"
#include "semcom/baselines/qam.hpp"
#include "semcom/channel.hpp"
#include "semcom/errors.hpp"
#include "semcom/metrics.hpp"
#include "semcom/seed.hpp"
#include "semcom/textcorpus.hpp"

using namespace semcom;
using namespace semcom::baselines;

namespace {

Bits random_bits(std::mt19937_64& rng, std::size_t n) {
    Bits b(n);
    for (auto& v : b) v = static_cast<std::uint8_t>(rng() & 1u);
    return b;
}

std::string random_text(std::mt19937_64& rng, const std::string& alphabet, std::size_t max_len) {
    std::string s(1 + rng() % max_len, ' ');
    for (auto& c : s) c = alphabet[rng() % alphabet.size()];
    return s;
}

const std::string kLower = "abcdefghijklmnopqrstuvwxyz ";

std::vector<std::string> english() {
    std::vector<std::string> out;
    for (const auto& l : text::synthesize_corpus(600, 3)) {
        std::string s;
        for (const auto& w : text::tokenize(l)) s += (s.empty() ? "" : " ") + w;
        out.push_back(s);
    }
    return out;
}

// Hard-decision transmission of bits through 16-QAM over AWGN.
Bits qam_awgn(const Bits& bits, double snr_db, std::mt19937_64& rng) {
    auto sym = qam16_modulate(bits);
    std::normal_distribution<double> n(0.0, std::sqrt(channel::snr_to_sigma2(snr_db) / 2.0));
    for (auto& s : sym) s += Symbol(n(rng), n(rng));
    auto out = qam16_demodulate(sym);
    out.resize(bits.size());
    return out;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("huffman construction on a dyadic profile") {
    std::map<unsigned char, double> w{{'a', 0.5}, {'b', 0.25}, {'c', 0.25}};
    auto h = HuffmanCodebook::from_frequencies(w, false);
    CHECK(h.code_length('a') == 1);
    CHECK(h.code_length('b') == 2);
    CHECK(h.code_length('c') == 2);
    CHECK(h.mean_length(w) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK_FALSE(h.has_escape());
    CHECK(h.decode(h.encode("abcab")) == "abcab");
}

TEST_CASE("huffman single symbol gets a one-bit code") {
    auto h = HuffmanCodebook::from_frequencies({{'x', 1.0}}, false);
    CHECK(h.code_length('x') == 1);
    CHECK(h.encode("xxx").size() == 3);
    CHECK(h.decode(h.encode("xxx")) == "xxx");
}

TEST_CASE("huffman escape and truncation") {
    auto h = HuffmanCodebook::from_frequencies({{'a', 3.0}, {'b', 1.0}}, true);
    REQUIRE(h.has_escape());
    CHECK(h.decode(h.encode("ab!Z")) == "ab!Z");
    auto bits = h.encode("ab!");
    bits.pop_back();
    CHECK_THROWS_AS(h.decode(bits), DecodeError);
    auto partial = h.decode_prefix(bits);
    CHECK(partial.truncated);
    CHECK(partial.text == "ab");
}

TEST_CASE("huffman is shorter than five bits on english") {
    auto corpus = english();
    auto h = HuffmanCodebook::from_text(corpus);
    std::map<unsigned char, double> w;
    for (const auto& s : corpus)
        for (unsigned char c : s) w[c] += 1.0;
    CHECK(h.mean_length(w) < 5.0);
}

TEST_CASE("fixed5 lengths and substitution") {
    Fixed5Codec f;
    CHECK(f.encode("ab").size() == 10);
    CHECK(f.decode(f.encode("hello world")) == "hello world");
    CHECK(f.decode(f.encode("a1b")) == "a?b");
    CHECK(Fixed5Codec::code_of('Q') == Fixed5Codec::kSubstitution);
    // Every 5-bit code decodes without error.
    for (int code = 0; code < 32; ++code) {
        Bits b(5);
        for (int k = 0; k < 5; ++k) b[k] = static_cast<std::uint8_t>((code >> (4 - k)) & 1);
        CHECK_NOTHROW(f.decode(b));
    }
    Bits bad = f.encode("abc");
    bad.pop_back();
    CHECK_THROWS_AS(f.decode(bad), DecodeError);
}

TEST_CASE("convolutional code") {
    Bits zeros(40, 0);
    auto c = conv_encode(zeros);
    CHECK(c.size() == 2 * (40 + 6));
    for (auto b : c) CHECK(b == 0);
    CHECK(viterbi_decode(c) == zeros);
}

TEST_CASE("viterbi corrects every single flipped coded bit of a 100-bit message") {
    std::mt19937_64 rng(5);
    auto msg = random_bits(rng, 100);
    auto coded = conv_encode(msg);
    REQUIRE(coded.size() == 212);
    int corrected = 0;
    for (std::size_t i = 0; i < coded.size(); ++i) {
        auto r = coded;
        r[i] ^= 1u;
        corrected += viterbi_decode(r) == msg;
    }
    CHECK(corrected == static_cast<int>(coded.size()));
}

TEST_CASE("16-QAM constellation") {
    auto pts = qam16_constellation();
    REQUIRE(pts.size() == 16);
    double e = 0.0;
    for (auto p : pts) e += std::norm(p);
    CHECK(e / 16.0 == doctest::Approx(1.0).epsilon(1e-12));
    // Nearest neighbours along an axis differ in exactly one bit.
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b) {
            double d = std::abs(pts[a] - pts[b]);
            if (std::abs(d - 2 * kQamScale) < 1e-9) CHECK(__builtin_popcount(a ^ b) == 1);
        }
    // Perturbations just inside half the minimum distance.
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ang(0.0, 2 * M_PI);
    for (int trial = 0; trial < 2000; ++trial) {
        auto bits = random_bits(rng, 4);
        auto s = qam16_modulate(bits);
        s[0] += std::polar(0.999 * kQamScale, ang(rng));
        CHECK(qam16_demodulate(s) == bits);
    }
}

TEST_CASE("codec roundtrips, 1000 each") {
    std::mt19937_64 rng(7);
    Fixed5Codec f;
    auto h = HuffmanCodebook::from_text(english());
    int ok_f = 0, ok_h = 0, ok_c = 0, ok_q = 0;
    for (int i = 0; i < 1000; ++i) {
        auto s = random_text(rng, kLower, 60);
        ok_f += f.decode(f.encode(s)) == s;
        auto t = random_text(rng, kLower + "ABZ!?.,0123", 60);
        ok_h += h.decode(h.encode(t)) == t;
        auto b = random_bits(rng, 1 + rng() % 300);
        ok_c += viterbi_decode(conv_encode(b)) == b;
        auto q = random_bits(rng, 4 * (1 + rng() % 100));
        ok_q += qam16_demodulate(qam16_modulate(q)) == q;
    }
    CHECK(ok_f == 1000);
    CHECK(ok_h == 1000);
    CHECK(ok_c == 1000);
    CHECK(ok_q == 1000);
}

TEST_CASE("noiseless conventional chain is lossless") {
    auto corpus = english();
    std::vector<std::string> sents(corpus.begin(), corpus.begin() + 50);
    auto h = HuffmanCodebook::from_text(corpus);
    Fixed5Codec f;
    for (auto kind : {channel::ChannelKind::awgn, channel::ChannelKind::rayleigh, channel::ChannelKind::rician}) {
        ConventionalLink link{true, {kind, 1.0}, std::nullopt, {}};
        for (const SourceCodec* c : {static_cast<const SourceCodec*>(&f), static_cast<const SourceCodec*>(&h)}) {
            auto out = run_conventional(sents, *c, link, 8);
            std::vector<std::string> hyp;
            for (const auto& o : out) hyp.push_back(o.text);
            CHECK(metrics::bleu(sents, hyp, 1).score == 1.0);
            CHECK(hyp == sents);
        }
    }
}

TEST_CASE("huffman sends fewer channel symbols than fixed5") {
    auto corpus = english();
    auto h = HuffmanCodebook::from_text(corpus);
    Fixed5Codec f;
    ConventionalLink link{true, {}, std::nullopt, {}};
    std::size_t sh = 0, sf = 0;
    for (const auto& o : run_conventional(corpus, h, link, 9)) sh += o.n_symbols;
    for (const auto& o : run_conventional(corpus, f, link, 9)) sf += o.n_symbols;
    CHECK(sh < sf);
}

TEST_CASE("rayleigh without csi is worse than with csi at 12 dB") {
    auto corpus = english();
    std::vector<std::string> sents(corpus.begin(), corpus.begin() + 500);
    Fixed5Codec f;
    auto score = [&](bool csi) {
        ConventionalLink link{csi, {channel::ChannelKind::rayleigh, 1.0}, 12.0, {}};
        std::vector<std::string> hyp;
        for (const auto& o : run_conventional(sents, f, link, 10)) hyp.push_back(o.text);
        return metrics::bleu(sents, hyp, 1).score;
    };
    const double with = score(true), without = score(false);
    CAPTURE(with);
    CAPTURE(without);
    CHECK(without < with);
}

TEST_CASE("coded BER beats uncoded BER at 6 dB Eb/N0 in AWGN") {
    // Equal energy per information bit: 16-QAM carries 4 bits per symbol, the code has rate 1/2.
    const double eb_n0 = 6.0;
    const double es_uncoded = eb_n0 + 10.0 * std::log10(4.0);
    const double es_coded = eb_n0 + 10.0 * std::log10(2.0);
    std::mt19937_64 rng(11);
    const std::size_t n = 200000;
    std::size_t unc = 0, cod = 0;
    for (std::size_t done = 0; done < n; done += 1000) {
        auto b = random_bits(rng, 1000);
        auto r = qam_awgn(b, es_uncoded, rng);
        for (std::size_t i = 0; i < b.size(); ++i) unc += b[i] != r[i];
        auto rc = viterbi_decode(qam_awgn(conv_encode(b), es_coded, rng));
        for (std::size_t i = 0; i < b.size(); ++i) cod += b[i] != rc[i];
    }
    CAPTURE(unc);
    CAPTURE(cod);
    CHECK(cod < unc);
}

TEST_CASE("per-sentence results do not depend on batching") {
    auto corpus = english();
    std::vector<std::string> sents(corpus.begin(), corpus.begin() + 20);
    Fixed5Codec f;
    ConventionalLink link{false, {channel::ChannelKind::rician, 1.0}, 6.0, {}};
    auto all = run_conventional(sents, f, link, 12);
    for (std::size_t i = 0; i < sents.size(); ++i) {
        auto one = run_conventional_sentence(sents[i], f, link, derive_seed(12, i));
        CHECK(one.text == all[i].text);
        CHECK(one.bit_errors == all[i].bit_errors);
    }
}

}
