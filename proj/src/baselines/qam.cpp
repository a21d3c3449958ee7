#include "semcom/baselines/qam.hpp"

namespace semcom::baselines {

namespace {

// Gray pair (b_hi, b_lo) -> amplitude on the {-3, -1, +1, +3} grid.
constexpr int kLevel[4] = {-3, -1, 3, 1};  // index = 2*b_hi + b_lo: 00, 01, 10, 11

int level(std::uint8_t hi, std::uint8_t lo) { return kLevel[2 * (hi & 1U) + (lo & 1U)]; }

void slice(double v, Bits& out) {
    const double a = v / kQamScale;
    // Decision thresholds at -2, 0, +2 on the unscaled grid.
    if (a < -2.0) {
        out.push_back(0), out.push_back(0);
    } else if (a < 0.0) {
        out.push_back(0), out.push_back(1);
    } else if (a < 2.0) {
        out.push_back(1), out.push_back(1);
    } else {
        out.push_back(1), out.push_back(0);
    }
}

}  // namespace

std::vector<Symbol> qam16_constellation() {
    std::vector<Symbol> pts;
    for (int v = 0; v < 16; ++v) {
        Bits b = {static_cast<std::uint8_t>((v >> 3) & 1), static_cast<std::uint8_t>((v >> 2) & 1),
                  static_cast<std::uint8_t>((v >> 1) & 1), static_cast<std::uint8_t>(v & 1)};
        pts.push_back(qam16_modulate(b).front());
    }
    return pts;
}

std::vector<Symbol> qam16_modulate(const Bits& bits) {
    std::vector<Symbol> out;
    out.reserve((bits.size() + 3) / 4);
    auto at = [&](std::size_t i) -> std::uint8_t { return i < bits.size() ? bits[i] : 0; };
    for (std::size_t i = 0; i < bits.size(); i += 4)
        out.emplace_back(kQamScale * level(at(i), at(i + 1)), kQamScale * level(at(i + 2), at(i + 3)));
    return out;
}

Bits qam16_demodulate(const std::vector<Symbol>& symbols) {
    Bits out;
    out.reserve(symbols.size() * 4);
    for (const auto& s : symbols) {
        slice(s.real(), out);
        slice(s.imag(), out);
    }
    return out;
}

}  // namespace semcom::baselines
