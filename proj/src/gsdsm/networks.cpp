#include "semcom/gsdsm.hpp"

#include <torch/torch.h>

#include "semcom/errors.hpp"

namespace semcom::gsdsm {

namespace nn = torch::nn;

namespace {

// B x L x d x 2 -> B x 2 x L x d
at::Tensor to_map(const at::Tensor& signal) {
    if (signal.dim() != 4 || signal.size(3) != 2)
        throw ShapeError("signal must be B x L x d_sym x 2");
    return signal.permute({0, 3, 1, 2});
}

std::int64_t round_up(std::int64_t v, std::int64_t m) { return (v + m - 1) / m * m; }

}  // namespace

DoubleConvImpl::DoubleConvImpl(int in_channels, int out_channels) {
    conv1_ = register_module("conv1",
                             nn::Conv2d(nn::Conv2dOptions(in_channels, out_channels, 3).padding(1)));
    conv2_ = register_module("conv2",
                             nn::Conv2d(nn::Conv2dOptions(out_channels, out_channels, 3).padding(1)));
    norm1_ = register_module("norm1", nn::BatchNorm2d(out_channels));
    norm2_ = register_module("norm2", nn::BatchNorm2d(out_channels));
}

at::Tensor DoubleConvImpl::forward(const at::Tensor& x) {
    return torch::relu(norm2_(conv2_(torch::relu(norm1_(conv1_(x))))));
}

GeneratorImpl::GeneratorImpl(int base_channels) : base_(base_channels) {
    if (base_channels < 1) throw ConfigError("generator base channels must be >= 1");
    const int c = base_channels;
    input_ = register_module("input", nn::Conv2d(nn::Conv2dOptions(2, c, 3).padding(1)));
    down_ = register_module("down", nn::ModuleList());
    up_ = register_module("up", nn::ModuleList());
    merge_ = register_module("merge", nn::ModuleList());
    // Encoder widths c, 2c, 4c, 8c, 16c.
    down_->push_back(DoubleConv(c, c));
    for (int i = 1; i < 5; ++i) down_->push_back(DoubleConv(c << (i - 1), c << i));
    // Decoder: 16c -> 8c -> 4c -> 2c -> c.
    for (int i = 4; i >= 1; --i) {
        up_->push_back(nn::ConvTranspose2d(nn::ConvTranspose2dOptions(c << i, c << (i - 1), 2).stride(2)));
        merge_->push_back(DoubleConv(c << i, c << (i - 1)));
    }
    output_ = register_module("output", nn::Conv2d(nn::Conv2dOptions(c, 2, 1)));
}

at::Tensor GeneratorImpl::forward(const at::Tensor& signal) {
    auto x = to_map(signal);
    const auto h = x.size(2);
    const auto w = x.size(3);
    const auto hp = round_up(h, kDepthMultiple);
    const auto wp = round_up(w, kDepthMultiple);
    if (hp != h || wp != w) x = torch::constant_pad_nd(x, {0, wp - w, 0, hp - h});

    x = torch::relu(input_(x));
    std::vector<at::Tensor> skips;
    for (std::size_t i = 0; i < down_->size(); ++i) {
        if (i > 0) x = torch::max_pool2d(x, 2);
        x = down_[i]->as<DoubleConv>()->forward(x);
        skips.push_back(x);
    }
    for (std::size_t i = 0; i < up_->size(); ++i) {
        x = up_[i]->as<nn::ConvTranspose2d>()->forward(x);
        x = torch::cat({x, skips[skips.size() - 2 - i]}, 1);
        x = merge_[i]->as<DoubleConv>()->forward(x);
    }
    x = output_(x).narrow(2, 0, h).narrow(3, 0, w);
    return x.permute({0, 2, 3, 1});
}

CriticImpl::CriticImpl(int base_channels) : base_(base_channels) {
    if (base_channels < 1) throw ConfigError("critic base channels must be >= 1");
    convs_ = register_module("convs", nn::ModuleList());
    norms_ = register_module("norms", nn::ModuleList());
    int in = 2;
    for (int i = 0; i < 4; ++i) {
        const int out = base_channels << i;
        convs_->push_back(nn::Conv2d(nn::Conv2dOptions(in, out, 3).stride(2).padding(1)));
        norms_->push_back(nn::BatchNorm2d(out));
        in = out;
    }
    head_ = register_module("head", nn::Conv2d(nn::Conv2dOptions(in, 1, 3).padding(1)));
}

at::Tensor CriticImpl::forward(const at::Tensor& signal) {
    auto x = to_map(signal);
    for (std::size_t i = 0; i < convs_->size(); ++i) {
        x = convs_[i]->as<nn::Conv2d>()->forward(x);
        x = norms_[i]->as<nn::BatchNorm2d>()->forward(x);
        x = torch::leaky_relu(x, 0.2);
    }
    return head_(x);
}

}  // namespace semcom::gsdsm
