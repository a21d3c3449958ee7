#pragma once

#include <complex>
#include <vector>

#include "semcom/baselines/bits.hpp"

namespace semcom::baselines {

using Symbol = std::complex<double>;

// Gray-labelled 16-QAM on the {+-1, +-3} grid scaled by 1/sqrt(10). Each group of
// 4 bits (b0 b1 | b2 b3) maps to (I | Q); per axis 00 -> -3, 01 -> -1, 11 -> +1,
// 10 -> +3.
inline constexpr double kQamScale = 0.31622776601683794;  // 1/sqrt(10)

std::vector<Symbol> qam16_constellation();

// Pads with zeros to a multiple of 4 bits.
std::vector<Symbol> qam16_modulate(const Bits& bits);
Bits qam16_demodulate(const std::vector<Symbol>& symbols);

}  // namespace semcom::baselines
