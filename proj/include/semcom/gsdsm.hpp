#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <torch/nn/module.h>
#include <torch/nn/modules/batchnorm.h>
#include <torch/nn/modules/container/modulelist.h>
#include <torch/nn/modules/conv.h>
#include <torch/nn/pimpl.h>

#include <json.hpp>

#include "semcom/aedm.hpp"
#include "semcom/symbols.hpp"

namespace semcom::gsdsm {

enum class AdvMode { wgan_standard, paper_literal };

AdvMode parse_adv_mode(const std::string& s);
std::string to_string(AdvMode m);

struct GanLossConfig {
    double gp_coeff = 10.0;
    double sytc_weight = 1.0;  // weight of the syntactic distortion term
    double smtc_weight = 1.0;  // weight of the semantic distortion term
    AdvMode adv_mode = AdvMode::wgan_standard;

    void validate() const;
};

void to_json(nlohmann::json& j, const GanLossConfig& c);
void from_json(const nlohmann::json& j, GanLossConfig& c);

// Two 3x3 convolutions, each followed by batch normalization and ReLU.
class DoubleConvImpl : public torch::nn::Module {
public:
    DoubleConvImpl(int in_channels, int out_channels);
    at::Tensor forward(const at::Tensor& x);

private:
    torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr};
    torch::nn::BatchNorm2d norm1_{nullptr}, norm2_{nullptr};
};
TORCH_MODULE(DoubleConv);

// U-Net over the symbol block laid out as a 2-channel L x d_sym map: an input
// convolution, 5 encoder blocks (the last four halve the resolution), 4 decoder
// blocks (transpose-conv upsampling + skip concatenation) and an output
// convolution. L and d_sym are zero-padded to multiples of 16 and cropped back.
// The network predicts the clean signal, not the residual.
class GeneratorImpl : public torch::nn::Module {
public:
    static constexpr int kDepthMultiple = 16;

    explicit GeneratorImpl(int base_channels = 16);
    at::Tensor forward(const at::Tensor& signal);  // B x L x d x 2 -> same
    int base_channels() const { return base_; }

private:
    int base_;
    torch::nn::Conv2d input_{nullptr}, output_{nullptr};
    torch::nn::ModuleList down_, up_, merge_;
};
TORCH_MODULE(Generator);

// 4 x (stride-2 conv, batch norm, leaky ReLU) followed by a 3x3 conv to a
// one-channel score map (B x 1 x h x w).
class CriticImpl : public torch::nn::Module {
public:
    explicit CriticImpl(int base_channels = 16);
    at::Tensor forward(const at::Tensor& signal);  // B x L x d x 2
    int base_channels() const { return base_; }

private:
    int base_;
    torch::nn::ModuleList convs_, norms_;
    torch::nn::Conv2d head_{nullptr};
};
TORCH_MODULE(Critic);

// Signal tensor (B x L x d x 2) -> scores with leading batch dimension.
using CriticFn = std::function<at::Tensor(const at::Tensor&)>;
// Signal block -> feature tensor; the mapping used by the semantic loss.
using FeatureFn = std::function<at::Tensor(const SymbolBlock&)>;

SymbolBlock suppress(const SymbolBlock& y, Generator& gen);
at::Tensor critic_score(const SymbolBlock& signal, Critic& critic);

// wgan_standard: -mean(s); paper_literal: -mean(s^2).
at::Tensor generator_adv_loss(const at::Tensor& fake_scores, AdvMode mode);

// Interpolates alpha X + (1 - alpha) Ybar with alpha ~ U[0, 1] per sentence (inputs
// detached), and returns mean over sentences of (||grad critic(interp)||_2 - 1)^2.
// The result keeps its graph so it can be backpropagated into the critic.
at::Tensor gradient_penalty(const SymbolBlock& x_real, const SymbolBlock& y_fake,
                            const CriticFn& critic, std::uint64_t seed);
at::Tensor gradient_penalty(const SymbolBlock& x_real, const SymbolBlock& y_fake, Critic& critic,
                            std::uint64_t seed);

// wgan_standard: mean(fake) - mean(real) + gp_coeff * gp;
// paper_literal: mean(fake^2) - mean(real^2) + gp_coeff * gp.
at::Tensor critic_loss(const at::Tensor& real_scores, const at::Tensor& fake_scores,
                       const at::Tensor& gp, double gp_coeff, AdvMode mode);

// Mean over all entries of (x - ybar)^2.
at::Tensor syntactic_loss(const SymbolBlock& x, const SymbolBlock& y_bar);

at::Tensor semantic_loss(const SymbolBlock& x, const SymbolBlock& y_bar, const FeatureFn& f);
at::Tensor semantic_loss(const SymbolBlock& x, const SymbolBlock& y_bar, aedm::Aedm& model);

at::Tensor distortion_loss(const SymbolBlock& x, const SymbolBlock& y_bar,
                           const GanLossConfig& cfg, const FeatureFn& f);
at::Tensor distortion_loss(const SymbolBlock& x, const SymbolBlock& y_bar,
                           const GanLossConfig& cfg, aedm::Aedm& model);

}  // namespace semcom::gsdsm
