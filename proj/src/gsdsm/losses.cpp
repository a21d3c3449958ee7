#include <ATen/CPUGeneratorImpl.h>
#include <json.hpp>
#include <torch/torch.h>

#include "semcom/errors.hpp"
#include "semcom/gsdsm.hpp"

namespace semcom::gsdsm {

AdvMode parse_adv_mode(const std::string& s) {
    if (s == "wgan_standard") return AdvMode::wgan_standard;
    if (s == "paper_literal") return AdvMode::paper_literal;
    throw ConfigError("gan.adv_mode must be wgan_standard or paper_literal, got '" + s + "'");
}

std::string to_string(AdvMode m) {
    return m == AdvMode::wgan_standard ? "wgan_standard" : "paper_literal";
}

void GanLossConfig::validate() const {
    if (!(gp_coeff >= 0.0)) throw ConfigError("gan.gp_coeff must be >= 0");
    if (!(sytc_weight >= 0.0)) throw ConfigError("loss.sytc_weight must be >= 0");
    if (!(smtc_weight >= 0.0)) throw ConfigError("loss.smtc_weight must be >= 0");
}

void to_json(nlohmann::json& j, const GanLossConfig& c) {
    j = {{"gp_coeff", c.gp_coeff},
         {"sytc_weight", c.sytc_weight},
         {"smtc_weight", c.smtc_weight},
         {"adv_mode", to_string(c.adv_mode)}};
}

void from_json(const nlohmann::json& j, GanLossConfig& c) {
    j.at("gp_coeff").get_to(c.gp_coeff);
    j.at("sytc_weight").get_to(c.sytc_weight);
    j.at("smtc_weight").get_to(c.smtc_weight);
    c.adv_mode = parse_adv_mode(j.at("adv_mode").get<std::string>());
}

SymbolBlock suppress(const SymbolBlock& y, Generator& gen) {
    y.check();
    return y.with_values(gen->forward(y.values));
}

at::Tensor critic_score(const SymbolBlock& signal, Critic& critic) {
    signal.check();
    return critic->forward(signal.values);
}

at::Tensor generator_adv_loss(const at::Tensor& fake_scores, AdvMode mode) {
    return mode == AdvMode::wgan_standard ? -fake_scores.mean() : -fake_scores.pow(2).mean();
}

at::Tensor gradient_penalty(const SymbolBlock& x_real, const SymbolBlock& y_fake,
                            const CriticFn& critic, std::uint64_t seed) {
    x_real.check();
    x_real.check_same_shape(y_fake);
    const auto b = x_real.batch_size();
    auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
    auto alpha = at::rand({b, 1, 1, 1}, gen, x_real.values.options().requires_grad(false));
    auto inter = (alpha * x_real.values.detach() + (1.0 - alpha) * y_fake.values.detach())
                     .detach()
                     .requires_grad_(true);
    auto scores = critic(inter);
    at::Tensor grad;
    if (scores.requires_grad())
        grad = torch::autograd::grad({scores}, {inter}, {torch::ones_like(scores)},
                                     /*retain_graph=*/true, /*create_graph=*/true,
                                     /*allow_unused=*/true)[0];
    if (!grad.defined()) grad = torch::zeros_like(inter);  // critic ignores its input
    auto norm = grad.reshape({b, -1}).norm(2, 1);
    return (norm - 1.0).pow(2).mean();
}

at::Tensor gradient_penalty(const SymbolBlock& x_real, const SymbolBlock& y_fake, Critic& critic,
                            std::uint64_t seed) {
    return gradient_penalty(x_real, y_fake,
                            [&critic](const at::Tensor& t) { return critic->forward(t); }, seed);
}

at::Tensor critic_loss(const at::Tensor& real_scores, const at::Tensor& fake_scores,
                       const at::Tensor& gp, double gp_coeff, AdvMode mode) {
    if (mode == AdvMode::wgan_standard)
        return fake_scores.mean() - real_scores.mean() + gp_coeff * gp;
    return fake_scores.pow(2).mean() - real_scores.pow(2).mean() + gp_coeff * gp;
}

at::Tensor syntactic_loss(const SymbolBlock& x, const SymbolBlock& y_bar) {
    x.check_same_shape(y_bar);
    return (x.values - y_bar.values).pow(2).mean();
}

at::Tensor semantic_loss(const SymbolBlock& x, const SymbolBlock& y_bar, const FeatureFn& f) {
    x.check_same_shape(y_bar);
    return (f(x) - f(y_bar)).pow(2).mean();
}

at::Tensor semantic_loss(const SymbolBlock& x, const SymbolBlock& y_bar, aedm::Aedm& model) {
    return semantic_loss(x, y_bar, [&model](const SymbolBlock& s) { return model->feature_map(s); });
}

at::Tensor distortion_loss(const SymbolBlock& x, const SymbolBlock& y_bar,
                           const GanLossConfig& cfg, const FeatureFn& f) {
    cfg.validate();
    auto loss = cfg.sytc_weight * syntactic_loss(x, y_bar);
    if (cfg.smtc_weight != 0.0) loss = loss + cfg.smtc_weight * semantic_loss(x, y_bar, f);
    return loss;
}

at::Tensor distortion_loss(const SymbolBlock& x, const SymbolBlock& y_bar,
                           const GanLossConfig& cfg, aedm::Aedm& model) {
    return distortion_loss(x, y_bar, cfg,
                           [&model](const SymbolBlock& s) { return model->feature_map(s); });
}

}  // namespace semcom::gsdsm
