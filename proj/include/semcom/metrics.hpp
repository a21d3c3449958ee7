#pragma once

#include <string>
#include <vector>

#include <ATen/Tensor.h>

#include "semcom/symbols.hpp"

namespace semcom::metrics {

struct BleuReport {
    std::vector<double> precision;  // P_k, k = 1..K
    double brevity_penalty = 0.0;
    double score = 0.0;
    std::size_t ref_length = 0;
    std::size_t hyp_length = 0;
    int max_order = 1;
    bool empty_hypothesis = false;
};

// Corpus-level BLEU over whitespace-tokenized sentences: clipped n-gram precision
// pooled over the corpus, uniform 1/K weights, brevity penalty
// min(1, exp(1 - l_ref / l_hyp)).
BleuReport bleu(const std::vector<std::string>& references,
                const std::vector<std::string>& hypotheses, int max_order);

BleuReport bleu(const std::vector<std::vector<std::string>>& references,
                const std::vector<std::vector<std::string>>& hypotheses, int max_order);

// sum (x - y)^2 / sum x^2 over all real entries. Throws DomainError for all-zero x.
double nmse(const at::Tensor& x, const at::Tensor& y_bar);
inline double nmse(const SymbolBlock& x, const SymbolBlock& y_bar) {
    return nmse(x.values, y_bar.values);
}

// Pools numerator and denominator across batches (epoch-level nMSE).
class NmseAccumulator {
public:
    void add(const at::Tensor& x, const at::Tensor& y_bar);
    double value() const;
    bool empty() const { return den_ == 0.0; }

private:
    double num_ = 0.0;
    double den_ = 0.0;
};

}  // namespace semcom::metrics
