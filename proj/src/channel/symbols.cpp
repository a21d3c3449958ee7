#include "semcom/symbols.hpp"

#include <ATen/ATen.h>

#include "semcom/errors.hpp"

namespace semcom {

void SymbolBlock::check() const {
    if (!values.defined() || values.dim() != 4 || values.size(3) != 2)
        throw ShapeError("symbol block must be B x L x d_sym x 2");
    if (mask.defined() &&
        (mask.dim() != 2 || mask.size(0) != values.size(0) || mask.size(1) != values.size(1)))
        throw ShapeError("symbol mask must be B x L");
}

void SymbolBlock::check_same_shape(const SymbolBlock& other) const {
    if (!values.sizes().equals(other.values.sizes()))
        throw ShapeError("symbol block shape mismatch");
}

double SymbolBlock::power() const {
    check();
    auto sq = values.detach().to(at::kDouble).pow(2).sum(-1);  // B x L x d
    if (!mask.defined()) return sq.mean().item<double>();
    auto m = mask.to(at::kDouble).unsqueeze(-1).expand_as(sq);
    return ((sq * m).sum() / m.sum()).item<double>();
}

bool SymbolBlock::finite() const { return values.isfinite().all().item<bool>(); }

}  // namespace semcom
