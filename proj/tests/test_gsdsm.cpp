#include "doctest_torch.hpp"

#include <cmath>

#include <torch/torch.h>

#include "semcom/errors.hpp"
#include "semcom/gsdsm.hpp"
#include "test_util.hpp"

using namespace semcom;
using namespace semcom::gsdsm;

namespace {

SymbolBlock randn_block(std::int64_t b, std::int64_t l, std::int64_t d, std::uint64_t seed) {
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    return {at::randn({b, l, d, 2}, gen, at::kDouble), {}};
}

SymbolBlock block_of(std::vector<double> v) {
    return {at::tensor(v, at::kDouble).reshape({1, 1, -1, 2}), {}};
}

}  // namespace

TEST_SUITE("gsdsm") {

TEST_CASE("adv mode parsing and config validation") {
    CHECK(parse_adv_mode("wgan_standard") == AdvMode::wgan_standard);
    CHECK(parse_adv_mode("paper_literal") == AdvMode::paper_literal);
    CHECK_THROWS_AS(parse_adv_mode("hinge"), ConfigError);
    GanLossConfig c;
    CHECK(c.gp_coeff == 10.0);
    CHECK(c.adv_mode == AdvMode::wgan_standard);
    c.sytc_weight = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("suppress preserves shape") {
    torch::manual_seed(1);
    Generator g(4);
    g->eval();
    for (auto [l, d] : std::vector<std::pair<int, int>>{{32, 16}, {7, 3}, {17, 16}, {1, 1}}) {
        auto y = randn_block(2, l, d, 3);
        y.values = y.values.to(at::kFloat);
        auto out = suppress(y, g);
        CHECK(out.values.sizes() == y.values.sizes());
        CHECK(out.finite());
    }
}

TEST_CASE("generator block counts") {
    Generator g(4);
    int convs = 0, transposed = 0;
    for (const auto& m : g->modules(false)) {
        if (m->as<torch::nn::Conv2d>()) ++convs;
        if (m->as<torch::nn::ConvTranspose2d>()) ++transposed;
    }
    CHECK(transposed == 4);
    // input + output adapters, two per double-conv block (5 encoder + 4 decoder)
    CHECK(convs == 2 + 2 * 9);
}

TEST_CASE("suppress is deterministic in inference mode") {
    torch::manual_seed(2);
    Generator g(4);
    g->eval();
    auto y = randn_block(2, 9, 4, 4);
    y.values = y.values.to(at::kFloat);
    CHECK(torch::equal(suppress(y, g).values, suppress(y, g).values));
}

TEST_CASE("critic scores are finite and batch-equivariant") {
    torch::manual_seed(3);
    Critic c(4);
    c->eval();
    auto a = randn_block(3, 12, 8, 5);
    a.values = a.values.to(at::kFloat);
    auto s = critic_score(a, c);
    CHECK(s.size(0) == 3);
    CHECK(torch::isfinite(s).all().item<bool>());
    SymbolBlock aa{torch::cat({a.values, a.values}), {}};
    auto ss = critic_score(aa, c);
    CHECK((ss - torch::cat({s, s})).abs().max().item<double>() < 1e-6);
}

TEST_CASE("critic input gradient matches finite differences") {
    torch::manual_seed(4);
    Critic c(2);
    c->to(at::kDouble);
    c->train();
    auto x = randn_block(2, 5, 3, 6);
    auto xv = x.values.clone().requires_grad_(true);
    auto g = torch::autograd::grad({critic_score({xv, {}}, c).mean()}, {xv})[0].reshape({-1});
    auto flat = x.values.reshape({-1});
    auto fd = at::zeros_like(flat);
    const double eps = 1e-6;
    torch::NoGradGuard ng;
    for (std::int64_t i = 0; i < flat.numel(); ++i) {
        auto p = flat.clone(), q = flat.clone();
        p[i] += eps;
        q[i] -= eps;
        fd[i] = (critic_score({p.reshape(xv.sizes()), {}}, c).mean().item<double>() -
                 critic_score({q.reshape(xv.sizes()), {}}, c).mean().item<double>()) / (2 * eps);
    }
    CHECK(((g - fd).norm() / fd.norm()).item<double>() < 1e-3);
}

TEST_CASE("generator adversarial loss") {
    auto zero = at::zeros({4}, at::kDouble);
    CHECK(generator_adv_loss(zero, AdvMode::wgan_standard).item<double>() == 0.0);
    CHECK(generator_adv_loss(zero, AdvMode::paper_literal).item<double>() == 0.0);
    auto s = at::tensor({1.0, 3.0}, at::kDouble);
    CHECK(generator_adv_loss(s, AdvMode::wgan_standard).item<double>() == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(generator_adv_loss(s, AdvMode::paper_literal).item<double>() == doctest::Approx(-5.0).epsilon(1e-12));
}

TEST_CASE("gradient penalty closed forms") {
    auto x = randn_block(3, 4, 5, 7);
    auto y = randn_block(3, 4, 5, 8);
    const double m = 4 * 5 * 2;
    SUBCASE("sum critic") {
        CriticFn sum = [](const at::Tensor& z) { return z.sum({1, 2, 3}); };
        auto gp = gradient_penalty(x, y, sum, 1).item<double>();
        CHECK(std::abs(gp - std::pow(std::sqrt(m) - 1.0, 2)) < 1e-4);
    }
    SUBCASE("linear critic with known coefficients") {
        auto gen = at::make_generator<at::CPUGeneratorImpl>(9);
        auto coeff = at::randn({4, 5, 2}, gen, at::kDouble);
        CriticFn lin = [&](const at::Tensor& z) { return (z * coeff).sum({1, 2, 3}); };
        auto gp = gradient_penalty(x, y, lin, 2).item<double>();
        const double expect = std::pow(coeff.norm().item<double>() - 1.0, 2);
        CHECK(std::abs(gp - expect) < 1e-4);
    }
    SUBCASE("constant critic") {
        CriticFn cst = [](const at::Tensor& z) { return at::zeros({z.size(0)}, z.options()); };
        CHECK(gradient_penalty(x, y, cst, 3).item<double>() == doctest::Approx(1.0));
    }
    SUBCASE("non-negative for a real critic") {
        torch::manual_seed(5);
        Critic c(2);
        c->to(at::kDouble);
        for (std::uint64_t s = 0; s < 5; ++s) CHECK(gradient_penalty(x, y, c, s).item<double>() >= 0.0);
    }
}

TEST_CASE("gradient penalty backpropagates into the critic") {
    torch::manual_seed(6);
    Critic c(2);
    c->to(at::kDouble);
    auto x = randn_block(2, 6, 4, 10);
    auto y = randn_block(2, 6, 4, 11);
    c->zero_grad();
    gradient_penalty(x, y, c, 4).backward();
    double total = 0.0;
    for (auto& p : c->parameters())
        if (p.grad().defined()) total += p.grad().abs().sum().item<double>();
    CHECK(total > 0.0);
}

TEST_CASE("critic loss arithmetic") {
    auto two = at::tensor({2.0}, at::kDouble), one = at::tensor({1.0}, at::kDouble);
    auto gp0 = at::tensor(0.0, at::kDouble), gp5 = at::tensor(0.5, at::kDouble);
    CHECK(critic_loss(two, two, gp0, 10, AdvMode::wgan_standard).item<double>() == 0.0);
    CHECK(critic_loss(two, two, gp0, 10, AdvMode::paper_literal).item<double>() == 0.0);
    CHECK(critic_loss(two, one, gp5, 10, AdvMode::wgan_standard).item<double>() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(critic_loss(two, one, gp0, 10, AdvMode::paper_literal).item<double>() == doctest::Approx(-3.0).epsilon(1e-12));
    auto a = at::tensor({0.3, -1.2, 2.5}, at::kDouble), b = at::tensor({1.1, 0.4, -0.7}, at::kDouble);
    CHECK(critic_loss(a, b, gp0, 10, AdvMode::wgan_standard).item<double>() ==
          doctest::Approx(-critic_loss(b, a, gp0, 10, AdvMode::wgan_standard).item<double>()).epsilon(1e-12));
}

TEST_CASE("syntactic loss") {
    auto x = block_of({1, 1}), y = block_of({0, 1});
    CHECK(syntactic_loss(x, x).item<double>() == 0.0);
    CHECK(syntactic_loss(x, y).item<double>() == doctest::Approx(0.5).epsilon(1e-12));
    auto a = randn_block(2, 3, 4, 12), b = randn_block(2, 3, 4, 13);
    const double base = syntactic_loss(a, b).item<double>();
    CHECK(syntactic_loss(a.with_values(a.values * 3), b.with_values(b.values * 3)).item<double>() ==
          doctest::Approx(9 * base).epsilon(1e-12));
    CHECK_THROWS_AS(syntactic_loss(a, randn_block(2, 3, 5, 1)), ShapeError);
}

TEST_CASE("semantic loss with stub features") {
    FeatureFn identity = [](const SymbolBlock& s) { return s.values; };
    auto a = randn_block(2, 3, 4, 14), b = randn_block(2, 3, 4, 15);
    CHECK(semantic_loss(a, a, identity).item<double>() == 0.0);
    CHECK(semantic_loss(a, b, identity).item<double>() == doctest::Approx(syntactic_loss(a, b).item<double>()).epsilon(1e-12));
    CHECK(semantic_loss(a, b, identity).item<double>() >= 0.0);
}

TEST_CASE("semantic loss through the decoder feature map") {
    torch::manual_seed(7);
    aedm::AedmConfig c{1, 2, 16, 32, 4, 0.1, 12};
    aedm::Aedm m(c);
    m->to(at::kDouble);
    auto a = randn_block(2, 3, 4, 16), b = randn_block(2, 3, 4, 17);
    CHECK(semantic_loss(a, a, m).item<double>() == 0.0);
    CHECK(semantic_loss(a, b, m).item<double>() > 0.0);
}

TEST_CASE("distortion loss weights") {
    FeatureFn half = [](const SymbolBlock& s) { return s.values * std::sqrt(0.5); };
    auto x = block_of({1, 1}), y = block_of({0, 1});
    GanLossConfig cfg;
    cfg.sytc_weight = 0;
    cfg.smtc_weight = 0;
    CHECK(distortion_loss(x, y, cfg, half).item<double>() == 0.0);
    cfg.sytc_weight = 1;
    CHECK(distortion_loss(x, y, cfg, half).item<double>() == doctest::Approx(syntactic_loss(x, y).item<double>()));
    cfg.sytc_weight = 2;
    cfg.smtc_weight = 3;
    CHECK(syntactic_loss(x, y).item<double>() == doctest::Approx(0.5));
    CHECK(semantic_loss(x, y, half).item<double>() == doctest::Approx(0.25));
    CHECK(std::abs(distortion_loss(x, y, cfg, half).item<double>() - 1.75) < 1e-6);
}

}
