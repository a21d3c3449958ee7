#include "semcom/channel.hpp"

#include <cmath>

#include <ATen/ATen.h>
#include <ATen/CPUGeneratorImpl.h>

#include "semcom/errors.hpp"
#include "semcom/seed.hpp"

namespace semcom::channel {

namespace {

at::Generator generator(std::uint64_t seed) {
    return at::make_generator<at::CPUGeneratorImpl>(seed);
}

// CN(0, var) samples as a ... x 2 real tensor.
at::Tensor complex_normal(at::IntArrayRef shape, double var, std::uint64_t seed,
                          at::ScalarType dtype) {
    std::vector<std::int64_t> full(shape.begin(), shape.end());
    full.push_back(2);
    auto gen = generator(seed);
    auto n = at::randn(full, gen, at::TensorOptions().dtype(at::kDouble));
    return (n * std::sqrt(var / 2.0)).to(dtype);
}

}  // namespace

ChannelKind parse_kind(std::string_view name) {
    if (name == "awgn") return ChannelKind::awgn;
    if (name == "rician") return ChannelKind::rician;
    if (name == "rayleigh") return ChannelKind::rayleigh;
    throw ConfigError("unknown channel kind '" + std::string(name) +
                      "' (expected awgn, rician or rayleigh)");
}

std::string to_string(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::awgn: return "awgn";
        case ChannelKind::rician: return "rician";
        case ChannelKind::rayleigh: return "rayleigh";
    }
    throw ConfigError("unknown channel kind");
}

double snr_to_sigma2(double snr_db, double signal_power) {
    if (!std::isfinite(snr_db) || !std::isfinite(signal_power))
        throw DomainError("snr_to_sigma2: non-finite input");
    if (signal_power <= 0.0) throw DomainError("snr_to_sigma2: signal power must be > 0");
    return signal_power / std::pow(10.0, snr_db / 10.0);
}

at::Tensor sample_fading(const FadingSpec& spec, std::int64_t batch, std::uint64_t seed,
                         at::ScalarType dtype) {
    if (batch < 1) throw ConfigError("sample_fading: batch must be >= 1");
    switch (spec.kind) {
        case ChannelKind::awgn: {
            auto h = at::zeros({batch, 2}, at::TensorOptions().dtype(dtype));
            h.select(1, 0).fill_(1.0);
            return h;
        }
        case ChannelKind::rayleigh:
            return complex_normal({batch}, 1.0, seed, dtype);
        case ChannelKind::rician: {
            const double k = spec.rician_k;
            if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("rician k-factor must be >= 0");
            auto h = complex_normal({batch}, 1.0 / (k + 1.0), seed, at::kDouble);
            h.select(1, 0).add_(std::sqrt(k / (k + 1.0)));
            return h.to(dtype);
        }
    }
    throw ConfigError("sample_fading: unknown channel kind");
}

ChannelRealization make_realization(const FadingSpec& spec, std::int64_t batch, double snr_db,
                                    std::uint64_t seed, at::ScalarType dtype) {
    ChannelRealization r;
    r.kind = spec.kind;
    r.rician_k = spec.rician_k;
    r.h = sample_fading(spec, batch, derive_seed(seed, 1), dtype);
    r.sigma2 = snr_to_sigma2(snr_db, 1.0);
    r.seed = derive_seed(seed, 2);
    return r;
}

at::Tensor complex_scale(const at::Tensor& values, const at::Tensor& h) {
    std::vector<std::int64_t> view(static_cast<std::size_t>(values.dim()), 1);
    view.front() = h.size(0);
    auto hr = h.select(1, 0).reshape(view).to(values.scalar_type());
    auto hi = h.select(1, 1).reshape(view).to(values.scalar_type());
    auto xr = values.narrow(-1, 0, 1);
    auto xi = values.narrow(-1, 1, 1);
    return at::cat({hr * xr - hi * xi, hr * xi + hi * xr}, -1);
}

SymbolBlock transmit(const SymbolBlock& x, const ChannelRealization& realization) {
    x.check();
    if (!realization.h.defined() || realization.h.dim() != 2 || realization.h.size(1) != 2 ||
        realization.h.size(0) != x.batch_size())
        throw ShapeError("transmit: fading coefficients must be B x 2 matching the symbol block");
    if (!(realization.sigma2 >= 0.0)) throw DomainError("transmit: sigma2 must be >= 0");
    auto faded = complex_scale(x.values, realization.h);
    auto shape = x.values.sizes().vec();
    shape.pop_back();
    auto noise = complex_normal(shape, realization.sigma2, realization.seed, x.values.scalar_type());
    return x.with_values(faded + noise);
}

CsiEstimate estimate_csi(const at::Tensor& h_true, double error_var, std::uint64_t seed) {
    if (!(error_var >= 0.0)) throw DomainError("CSI error variance must be >= 0");
    CsiEstimate est{h_true, h_true, error_var};
    if (error_var > 0.0)
        est.h_est = h_true + complex_normal({h_true.size(0)}, error_var, seed, h_true.scalar_type());
    return est;
}

SymbolBlock equalize(const SymbolBlock& y, const at::Tensor& h_est) {
    y.check();
    if (h_est.dim() != 2 || h_est.size(1) != 2 || h_est.size(0) != y.batch_size())
        throw ShapeError("equalize: CSI must be B x 2 matching the symbol block");
    auto mag2 = h_est.to(at::kDouble).pow(2).sum(1);
    if ((mag2 <= kDegenerateGain * kDegenerateGain).any().item<bool>())
        throw DegenerateChannelError("equalize: |h_est| <= 1e-6");
    // 1/h = conj(h) / |h|^2
    auto inv = at::stack({h_est.select(1, 0).to(at::kDouble) / mag2,
                          -h_est.select(1, 1).to(at::kDouble) / mag2},
                         1);
    return y.with_values(complex_scale(y.values, inv));
}

}  // namespace semcom::channel
