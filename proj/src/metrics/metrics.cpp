#include "semcom/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <ATen/ATen.h>

#include "semcom/errors.hpp"

namespace semcom::metrics {

namespace {

using Ngram = std::vector<std::string>;

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(std::move(w));
    return out;
}

std::map<Ngram, std::size_t> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
    std::map<Ngram, std::size_t> counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i)
        ++counts[Ngram(toks.begin() + static_cast<std::ptrdiff_t>(i),
                       toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
    return counts;
}

}  // namespace

BleuReport bleu(const std::vector<std::vector<std::string>>& references,
                const std::vector<std::vector<std::string>>& hypotheses, int max_order) {
    if (references.size() != hypotheses.size())
        throw ShapeError("bleu: reference and hypothesis corpora differ in size");
    if (max_order < 1) throw ConfigError("bleu: max order must be >= 1");

    BleuReport r;
    r.max_order = max_order;
    std::vector<std::size_t> matched(static_cast<std::size_t>(max_order), 0);
    std::vector<std::size_t> total(static_cast<std::size_t>(max_order), 0);
    for (std::size_t s = 0; s < references.size(); ++s) {
        const auto& ref = references[s];
        const auto& hyp = hypotheses[s];
        r.ref_length += ref.size();
        r.hyp_length += hyp.size();
        for (int k = 1; k <= max_order; ++k) {
            const auto ref_counts = ngram_counts(ref, static_cast<std::size_t>(k));
            for (const auto& [g, c] : ngram_counts(hyp, static_cast<std::size_t>(k))) {
                auto it = ref_counts.find(g);
                matched[static_cast<std::size_t>(k - 1)] +=
                    it == ref_counts.end() ? 0 : std::min(c, it->second);
                total[static_cast<std::size_t>(k - 1)] += c;
            }
        }
    }

    r.precision.resize(static_cast<std::size_t>(max_order), 0.0);
    for (std::size_t k = 0; k < r.precision.size(); ++k)
        r.precision[k] = total[k] == 0 ? 0.0
                                       : static_cast<double>(matched[k]) / static_cast<double>(total[k]);

    if (r.hyp_length == 0) {
        r.empty_hypothesis = true;
        // exp(1 - l_ref / 0) -> 0; kept at the smallest positive double so BP stays in (0, 1].
        r.brevity_penalty = std::numeric_limits<double>::min();
        r.score = 0.0;
        return r;
    }
    r.brevity_penalty = std::min(
        1.0, std::exp(1.0 - static_cast<double>(r.ref_length) / static_cast<double>(r.hyp_length)));

    double log_sum = 0.0;
    for (double p : r.precision) {
        if (p <= 0.0) {
            r.score = 0.0;
            return r;
        }
        log_sum += std::log(p) / static_cast<double>(max_order);
    }
    r.score = r.brevity_penalty * std::exp(log_sum);
    return r;
}

BleuReport bleu(const std::vector<std::string>& references,
                const std::vector<std::string>& hypotheses, int max_order) {
    std::vector<std::vector<std::string>> refs, hyps;
    refs.reserve(references.size());
    hyps.reserve(hypotheses.size());
    for (const auto& s : references) refs.push_back(split_ws(s));
    for (const auto& s : hypotheses) hyps.push_back(split_ws(s));
    return bleu(refs, hyps, max_order);
}

double nmse(const at::Tensor& x, const at::Tensor& y_bar) {
    if (!x.sizes().equals(y_bar.sizes())) throw ShapeError("nmse: shape mismatch");
    auto xd = x.detach().to(at::kDouble);
    const double den = xd.pow(2).sum().item<double>();
    if (den == 0.0) throw DomainError("nmse: transmitted signal is all zero");
    return (xd - y_bar.detach().to(at::kDouble)).pow(2).sum().item<double>() / den;
}

void NmseAccumulator::add(const at::Tensor& x, const at::Tensor& y_bar) {
    if (!x.sizes().equals(y_bar.sizes())) throw ShapeError("nmse: shape mismatch");
    auto xd = x.detach().to(at::kDouble);
    num_ += (xd - y_bar.detach().to(at::kDouble)).pow(2).sum().item<double>();
    den_ += xd.pow(2).sum().item<double>();
}

double NmseAccumulator::value() const {
    if (den_ == 0.0) throw DomainError("nmse: transmitted signal is all zero");
    return num_ / den_;
}

}  // namespace semcom::metrics
