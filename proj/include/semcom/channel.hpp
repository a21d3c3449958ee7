#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <ATen/Tensor.h>

#include "semcom/symbols.hpp"

namespace semcom::channel {

enum class ChannelKind { awgn, rician, rayleigh };

ChannelKind parse_kind(std::string_view name);
std::string to_string(ChannelKind kind);

struct FadingSpec {
    ChannelKind kind = ChannelKind::awgn;
    double rician_k = 1.0;
};

// Block fading: one coefficient per sentence, stored as a B x 2 (re, im) tensor.
struct ChannelRealization {
    ChannelKind kind = ChannelKind::awgn;
    double rician_k = 1.0;
    at::Tensor h;
    double sigma2 = 1.0;
    std::uint64_t seed = 0;
};

struct CsiEstimate {
    at::Tensor h_true;
    at::Tensor h_est;
    double error_var = 0.0;
};

inline constexpr double kDegenerateGain = 1e-6;

double snr_to_sigma2(double snr_db, double signal_power = 1.0);

// Distribution per kind: AWGN h = 1; Rayleigh h ~ CN(0, 1); Rician
// h = sqrt(k/(k+1)) + CN(0, 1/(k+1)). E|h|^2 = 1 for all three.
at::Tensor sample_fading(const FadingSpec& spec, std::int64_t batch, std::uint64_t seed,
                         at::ScalarType dtype = at::kFloat);

ChannelRealization make_realization(const FadingSpec& spec, std::int64_t batch, double snr_db,
                                    std::uint64_t seed, at::ScalarType dtype = at::kFloat);

// y = h x + n with n ~ CN(0, sigma2) per complex entry (sigma2 / 2 per real part).
// Differentiable in x; bit-identical across calls for the same realization.
SymbolBlock transmit(const SymbolBlock& x, const ChannelRealization& realization);

// h_est = h + e, e ~ CN(0, v^2).
CsiEstimate estimate_csi(const at::Tensor& h_true, double error_var, std::uint64_t seed);

// Zero-forcing y / h_est per sentence. Throws DegenerateChannelError when any
// |h_est| <= kDegenerateGain.
SymbolBlock equalize(const SymbolBlock& y, const at::Tensor& h_est);

// Elementwise complex product of a B x ... x 2 tensor with per-sentence B x 2 coefficients.
at::Tensor complex_scale(const at::Tensor& values, const at::Tensor& h);

}  // namespace semcom::channel
