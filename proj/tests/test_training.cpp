#include "doctest_torch.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>
#include <torch/torch.h>

#include "semcom/errors.hpp"
#include "semcom/training.hpp"
#include "test_util.hpp"

using namespace semcom;
using namespace semcom::training;
using text::SentenceBatch;

namespace {

constexpr int kVocab = 24;

TrainConfig tiny_train() {
    TrainConfig c;
    c.batch_size = 8;
    c.epochs = 1;
    c.link.snr_db = 18.0;
    c.val_sentences = 0;
    c.save_epoch_checkpoints = false;
    return c;
}

SemComModel tiny(std::uint64_t seed) { return SemComModel::create(testutil::tiny_model(kVocab), seed); }

bool same_bundle(const LossBundle& a, const LossBundle& b) {
    return a.l_ce == b.l_ce && a.l_adv_g == b.l_adv_g && a.l_adv_d == b.l_adv_d && a.l_sytc == b.l_sytc &&
           a.l_smtc == b.l_smtc && a.l_dstr == b.l_dstr && a.l_total == b.l_total;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("total loss arithmetic") {
    CHECK((total_loss(1, 1, 1, 1, {1, 2, 3, 4}) == doctest::Approx(10.0).epsilon(1e-15)));
    CHECK((total_loss(2.5, 7, 9, 11, {1.5, 0, 0, 0}) == doctest::Approx(3.75).epsilon(1e-15)));
    auto t = total_loss(at::tensor(1.0), at::tensor(1.0), at::tensor(1.0), at::tensor(1.0), {1, 2, 3, 4});
    CHECK(t.item<double>() == doctest::Approx(10.0));
    CHECK_THROWS_AS(total_loss(NAN, 0, 0, 0, {1, 0, 0, 0}), DomainError);
}

TEST_CASE("defaults and validation") {
    TrainConfig c;
    CHECK(c.epochs == 60);
    CHECK(c.lr_aedm == 1e-4);
    CHECK(c.weight_decay_aedm == 5e-4);
    CHECK(c.lr_gen == 2e-4);
    CHECK(c.lr_critic == 2e-4);
    CHECK(c.n_altv == 2);
    CHECK(c.w1 == 1.0);
    CHECK(c.w2 == 0.01);
    CHECK(c.w3 == 0.01);
    CHECK_NOTHROW(c.validate());
    auto bad = c;
    bad.lr_gen = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.epochs = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.n_altv = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.w2 = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.framework = Framework::conv_fixed_csi;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(parse_scheme("aot") == Scheme::aot);
    CHECK_THROWS_AS(parse_scheme("joint"), ConfigError);
}

TEST_CASE("jot step with zero learning rates leaves parameters bit-identical") {
    auto m = tiny(1);
    auto c = tiny_train();
    c.lr_aedm = c.lr_gen = c.lr_critic = 0.0;
    Trainer t(m, c);
    auto before_a = testutil::snapshot(*m.aedm), before_g = testutil::snapshot(*m.generator),
         before_c = testutil::snapshot(*m.critic);
    auto b = SentenceBatch::from_content(testutil::random_rows(4, 4, 8, kVocab, 2));
    t.jot_step(b, 3);
    CHECK(testutil::bit_identical(before_a, testutil::snapshot(*m.aedm)));
    CHECK(testutil::bit_identical(before_g, testutil::snapshot(*m.generator)));
    CHECK(testutil::bit_identical(before_c, testutil::snapshot(*m.critic)));
}

TEST_CASE("jot step is repeatable from the same state") {
    auto b = SentenceBatch::from_content(testutil::random_rows(4, 4, 8, kVocab, 4));
    auto run = [&] {
        auto m = tiny(5);
        torch::manual_seed(99);
        Trainer t(m, tiny_train());
        return t.jot_step(b, 6);
    };
    auto a = run(), c = run();
    CHECK(same_bundle(a, c));
    CHECK(std::isfinite(a.l_total));
    CHECK(a.l_total == doctest::Approx(total_loss(a.l_ce, a.l_adv_g, a.l_sytc, a.l_smtc, weights_of(tiny_train()))));
}

TEST_CASE("jot step updates aedm, generator and critic") {
    auto m = tiny(7);
    Trainer t(m, tiny_train());
    auto a0 = testutil::snapshot(*m.aedm), g0 = testutil::snapshot(*m.generator), c0 = testutil::snapshot(*m.critic);
    t.jot_step(SentenceBatch::from_content(testutil::random_rows(4, 4, 8, kVocab, 8)), 9);
    CHECK_FALSE(testutil::bit_identical(a0, testutil::snapshot(*m.aedm)));
    CHECK_FALSE(testutil::bit_identical(g0, testutil::snapshot(*m.generator)));
    CHECK_FALSE(testutil::bit_identical(c0, testutil::snapshot(*m.critic)));
    for (auto& p : m.critic->parameters()) CHECK(p.requires_grad());
}

TEST_CASE("jot step cross entropy halves within 200 steps on 32 sentences") {
    ModelConfig mc = testutil::tiny_model(kVocab);
    mc.aedm.num_layers = 2;
    mc.aedm.d_model = 32;
    mc.aedm.d_ff = 64;
    mc.aedm.num_heads = 4;
    auto m = SemComModel::create(mc, 10);
    auto c = tiny_train();
    c.lr_aedm = 1e-3;
    c.batch_size = 32;
    Trainer t(m, c);
    auto b = SentenceBatch::from_content(testutil::random_rows(32, 4, 10, kVocab, 11));
    double first = 0, last = 0;
    for (int s = 1; s <= 200; ++s) {
        auto l = t.jot_step(b, static_cast<std::uint64_t>(s));
        if (s == 1) first = l.l_ce;
        last = l.l_ce;
    }
    CAPTURE(first);
    CAPTURE(last);
    CHECK(last <= 0.5 * first);
}

TEST_CASE("gsdsm step never touches the aedm") {
    auto m = tiny(12);
    Trainer t(m, tiny_train());
    auto b = SentenceBatch::from_content(testutil::random_rows(4, 4, 8, kVocab, 13));
    auto x = m.aedm->encode(b);
    auto y = pass_link(x, {{channel::ChannelKind::rician, 1.0}, 6.0, CsiMode::none, 0.0}, 14).decoder_input;
    auto a0 = testutil::snapshot(*m.aedm), g0 = testutil::snapshot(*m.generator), c0 = testutil::snapshot(*m.critic);
    auto l = t.gsdsm_step(x, y, 15);
    CHECK(testutil::bit_identical(a0, testutil::snapshot(*m.aedm)));
    CHECK_FALSE(testutil::bit_identical(g0, testutil::snapshot(*m.generator)));
    CHECK_FALSE(testutil::bit_identical(c0, testutil::snapshot(*m.critic)));
    CHECK(l.l_ce == 0.0);
    CHECK(l.l_dstr == doctest::Approx(l.l_sytc + l.l_smtc));
    for (auto& p : m.aedm->parameters()) CHECK(p.requires_grad());
}

TEST_CASE("gsdsm step with w3 = 0 updates the generator from the distortion loss alone") {
    auto c = tiny_train();
    c.w3 = 0.0;
    auto b = SentenceBatch::from_content(testutil::random_rows(4, 4, 8, kVocab, 16));
    auto run = [&](std::uint64_t critic_seed) {
        auto m = tiny(17);
        // Swap in a differently initialized critic.
        auto other = tiny(critic_seed);
        {
            torch::NoGradGuard ng;
            auto dst = m.critic->parameters();
            auto src = other.critic->parameters();
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i].copy_(src[i]);
        }
        Trainer t(m, c);
        auto x = m.aedm->encode(b);
        auto y = pass_link(x, {{channel::ChannelKind::awgn, 1.0}, 6.0, CsiMode::none, 0.0}, 18).decoder_input;
        auto l = t.gsdsm_step(x, y, 19);
        CHECK(l.l_total == doctest::Approx(l.l_dstr));
        return testutil::snapshot(*m.generator);
    };
    CHECK(testutil::bit_identical(run(100), run(200)));
}

TEST_CASE("critic update lowers its own loss in at least 90 of 100 trials") {
    auto c = tiny_train();
    c.lr_gen = 0.0;
    int lowered = 0;
    // The critic batch-normalizes; signals must be large enough that the deepest
    // blocks still normalize over more than a handful of values.
    auto mc = testutil::tiny_model(kVocab);
    mc.aedm.d_sym = 8;
    mc.critic_base_channels = 8;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        auto m = SemComModel::create(mc, 1000 + trial);
        Trainer t(m, c);
        auto gen = at::make_generator<at::CPUGeneratorImpl>(trial);
        SymbolBlock x{at::randn({16, 16, 8, 2}, gen), {}};
        SymbolBlock y{x.values + 0.5 * at::randn({16, 16, 8, 2}, gen), {}};
        auto rescore = [&] {
            auto yb = gsdsm::suppress(y, m.generator).detached();
            auto gp = gsdsm::gradient_penalty(x, yb, m.critic, 7);
            return gsdsm::critic_loss(gsdsm::critic_score(x, m.critic), gsdsm::critic_score(yb, m.critic), gp,
                                      c.gan.gp_coeff, c.gan.adv_mode)
                .item<double>();
        };
        const double before = rescore();
        t.gsdsm_step(x, y, 7);
        lowered += rescore() < before;
    }
    CAPTURE(lowered);
    CHECK(lowered >= 90);
}

TEST_CASE("aedm_with_gsdsm step: critic untouched, encoder moves, adversarial terms recorded as zero") {
    auto m = tiny(20);
    Trainer t(m, tiny_train());
    auto b = SentenceBatch::from_content(testutil::random_rows(4, 4, 8, kVocab, 21));
    auto x = m.aedm->encode(b);
    auto y = pass_link(x, {{channel::ChannelKind::awgn, 1.0}, 12.0, CsiMode::none, 0.0}, 22).decoder_input;
    std::vector<at::Tensor> enc0;
    for (auto& p : m.aedm->named_parameters())
        if (p.key().rfind("src_embed", 0) == 0 || p.key().rfind("encoder", 0) == 0 ||
            p.key().rfind("channel_encoder", 0) == 0)
            enc0.push_back(p.value().detach().clone());
    REQUIRE_FALSE(enc0.empty());
    auto c0 = testutil::snapshot(*m.critic), g0 = testutil::snapshot(*m.generator);
    auto l = t.aedm_with_gsdsm_step(y, b);
    CHECK(testutil::bit_identical(c0, testutil::snapshot(*m.critic)));
    CHECK_FALSE(testutil::bit_identical(g0, testutil::snapshot(*m.generator)));
    CHECK(l.l_adv_g == 0.0);
    CHECK(l.l_dstr == 0.0);
    CHECK(l.l_ce > 0.0);
    std::size_t i = 0;
    double delta = 0.0;
    for (auto& p : m.aedm->named_parameters())
        if (p.key().rfind("src_embed", 0) == 0 || p.key().rfind("encoder", 0) == 0 ||
            p.key().rfind("channel_encoder", 0) == 0)
            delta += (p.value().detach() - enc0[i++]).abs().sum().item<double>();
    CHECK(delta > 0.0);
}

TEST_CASE("jot step distortion terms reach the encoder only through the suppressor") {
    auto encoder_state = [](SemComModel& m) {
        std::vector<at::Tensor> parts;
        for (auto& p : m.aedm->named_parameters())
            if (p.key().rfind("src_embed", 0) == 0 || p.key().rfind("encoder", 0) == 0 ||
                p.key().rfind("channel_encoder", 0) == 0)
                parts.push_back(p.value().detach().reshape({-1}).clone());
        return torch::cat(parts);
    };
    auto cfg = tiny_train();
    cfg.w1 = 0.0;
    cfg.w2 = 0.0;
    cfg.weight_decay_aedm = 0.0;
    cfg.gan.sytc_weight = 1.0;
    cfg.gan.smtc_weight = 1.0;
    auto b = SentenceBatch::from_content(testutil::random_rows(4, 4, 8, kVocab, 30));

    SUBCASE("constant suppressor output leaves the encoder unchanged") {
        auto m = tiny(31);
        {
            torch::NoGradGuard no_grad;
            for (auto& p : m.generator->parameters()) p.zero_();
        }
        Trainer t(m, cfg);
        auto e0 = encoder_state(m);
        auto l = t.jot_step(b, 32);
        CHECK(l.l_sytc > 0.0);
        CHECK(testutil::bit_identical(e0, encoder_state(m)));
    }
    SUBCASE("input-dependent suppressor output moves the encoder") {
        auto m = tiny(31);
        Trainer t(m, cfg);
        auto e0 = encoder_state(m);
        t.jot_step(b, 32);
        CHECK_FALSE(testutil::bit_identical(e0, encoder_state(m)));
    }
}

TEST_CASE("non-finite loss aborts naming the component") {
    auto b = SentenceBatch::from_content(testutil::random_rows(4, 4, 8, kVocab, 23));
    SUBCASE("decoder output") {
        auto m = tiny(24);
        {
            torch::NoGradGuard ng;
            for (auto& p : m.aedm->named_parameters())
                if (p.key() == "output.bias") p.value().fill_(NAN);
        }
        Trainer t(m, tiny_train());
        try {
            t.jot_step(b, 1);
            FAIL("expected NonFiniteLossError");
        } catch (const NonFiniteLossError& e) {
            CHECK(e.component() == "l_ce");
        }
    }
    SUBCASE("generator output") {
        auto m = tiny(25);
        {
            torch::NoGradGuard ng;
            for (auto& p : m.generator->parameters()) p.fill_(NAN);
        }
        Trainer t(m, tiny_train());
        try {
            t.jot_step(b, 1);
            FAIL("expected NonFiniteLossError");
        } catch (const NonFiniteLossError& e) {
            CHECK(e.component() == "l_adv_d");
        }
    }
}

TEST_CASE("n_altv = 1 takes the alternating branch on every batch") {
    auto m = tiny(26);
    auto c = tiny_train();
    c.scheme = Scheme::aot;
    c.n_altv = 1;
    TrainData d{text::Vocabulary{}, testutil::random_rows(24, 4, 8, kVocab, 27), {}};
    auto r = train(m, d, c, std::nullopt);
    CHECK(r.joint_branches == 0);
    CHECK(r.alternating_branches == 3);
    c.n_altv = 2;
    auto m2 = tiny(26);
    auto r2 = train(m2, d, c, std::nullopt);
    CHECK(r2.joint_branches == 2);
    CHECK(r2.alternating_branches == 1);
}

TEST_CASE("sc baselines train on cross entropy only") {
    auto m = tiny(28);
    auto c = tiny_train();
    c.framework = Framework::sc_perfect_csi;
    c.link.fading.kind = channel::ChannelKind::rayleigh;
    Trainer t(m, c);
    auto g0 = testutil::snapshot(*m.generator), c0 = testutil::snapshot(*m.critic);
    auto l = t.step(SentenceBatch::from_content(testutil::random_rows(4, 4, 8, kVocab, 29)), 1, 30);
    CHECK(l.l_adv_d == 0.0);
    CHECK(l.l_total == l.l_ce);
    CHECK(testutil::bit_identical(g0, testutil::snapshot(*m.generator)));
    CHECK(testutil::bit_identical(c0, testutil::snapshot(*m.critic)));
}

TEST_CASE("train writes logs and checkpoints and is deterministic") {
    auto lines = text::synthesize_corpus(80, 31);
    std::vector<std::vector<std::string>> s;
    for (const auto& l : lines) s.push_back(text::tokenize(l));
    auto vocab = text::Vocabulary::from_sentences(s, 1000);
    auto c = tiny_train();
    c.epochs = 2;
    c.val_sentences = 8;
    c.save_epoch_checkpoints = true;
    c.scheme = Scheme::aot;
    auto data = prepare_train_data(s, vocab, c);
    CHECK(data.validation.size() == 8);
    CHECK(data.train.size() == 72);
    auto mc = testutil::tiny_model(static_cast<int>(vocab.size()));

    auto run = [&](const std::string& name) {
        auto dir = testutil::temp_dir(name);
        auto m = SemComModel::create(mc, 32);
        auto r = train(m, data, c, dir);
        std::ifstream in(dir / "train_log.jsonl");
        std::vector<nlohmann::json> log;
        for (std::string line; std::getline(in, line);) log.push_back(nlohmann::json::parse(line));
        CHECK(std::filesystem::exists(dir / "epoch-001.ckpt"));
        CHECK(std::filesystem::exists(dir / "epoch-002.ckpt"));
        CHECK(std::filesystem::exists(dir / "best.ckpt"));
        auto loaded = load_model(r.best_checkpoint);
        CHECK(loaded.vocab == vocab);
        CHECK(loaded.header.at("framework") == "ti-gsc");
        return log;
    };
    auto a = run("train_a"), b = run("train_b");
    REQUIRE(a.size() == 2);
    for (const char* k : {"epoch", "l_ce", "l_adv_g", "l_adv_d", "l_sytc", "l_smtc", "l_total", "nmse", "wall_seconds"})
        CHECK(a[0].contains(k));
    for (auto& j : a) j.erase("wall_seconds");
    for (auto& j : b) j.erase("wall_seconds");
    CHECK(a == b);
}

TEST_CASE("max_steps caps training") {
    auto m = tiny(33);
    auto c = tiny_train();
    c.epochs = 5;
    c.max_steps = 4;
    TrainData d{text::Vocabulary{}, testutil::random_rows(24, 4, 8, kVocab, 34), {}};
    auto r = train(m, d, c, std::nullopt);
    long steps = 0;
    for (const auto& e : r.log) steps += e.steps;
    CHECK(steps == 4);
    CHECK(r.log.size() == 2);
}

}
