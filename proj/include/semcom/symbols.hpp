#pragma once

#include <cstdint>

#include <ATen/Tensor.h>

namespace semcom {

// Complex baseband signal stored as a real tensor B x L x d_sym x 2 (real, imag).
// mask, when defined, is a B x L bool tensor marking real (non-pad) token slots.
struct SymbolBlock {
    at::Tensor values;
    at::Tensor mask;

    std::int64_t batch_size() const { return values.size(0); }
    std::int64_t tokens() const { return values.size(1); }
    std::int64_t symbols_per_token() const { return values.size(2); }

    // Mean |x|^2 over complex entries of unmasked token slots.
    double power() const;
    bool finite() const;

    // Throws ShapeError unless values is B x L x d x 2 and mask (if any) is B x L.
    void check() const;
    void check_same_shape(const SymbolBlock& other) const;

    SymbolBlock with_values(at::Tensor v) const { return {std::move(v), mask}; }
    SymbolBlock detached() const { return {values.detach(), mask}; }
};

}  // namespace semcom
