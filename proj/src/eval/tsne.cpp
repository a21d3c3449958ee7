#include "semcom/eval/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "semcom/errors.hpp"
#include "semcom/seed.hpp"

namespace semcom::eval {

namespace {

// Row-conditional probabilities with the Gaussian bandwidth tuned by bisection on beta.
void conditional_row(const std::vector<double>& d2, std::size_t i, std::size_t n, double log_perp,
                     std::vector<double>& row) {
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        double sum = 0.0, dsum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                row[j] = 0.0;
                continue;
            }
            row[j] = std::exp(-beta * d2[i * n + j]);
            sum += row[j];
            dsum += row[j] * d2[i * n + j];
        }
        if (sum <= 0.0) sum = std::numeric_limits<double>::min();
        const double entropy = std::log(sum) + beta * dsum / sum;
        for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
        const double diff = entropy - log_perp;
        if (std::abs(diff) < 1e-5) break;
        if (diff > 0) {
            lo = beta;
            beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
        } else {
            hi = beta;
            beta = 0.5 * (beta + lo);
        }
    }
}

}  // namespace

std::vector<std::array<double, 2>> tsne(const std::vector<std::vector<double>>& points, const TsneConfig& cfg) {
    const std::size_t n = points.size();
    if (n > kTsneMaxPoints) throw RangeError("tsne: at most 5000 points");
    if (cfg.perplexity <= 0 || cfg.iterations < 1) throw ConfigError("tsne: bad configuration");
    std::vector<std::array<double, 2>> y(n, {0.0, 0.0});
    if (n < 2) return y;
    const std::size_t dim = points[0].size();
    for (const auto& p : points)
        if (p.size() != dim) throw ShapeError("tsne: ragged input");

    std::vector<double> d2(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = points[i][k] - points[j][k];
                s += d * d;
            }
            d2[i * n + j] = d2[j * n + i] = s;
        }

    const double perp = std::min(cfg.perplexity, std::max(1.0, (static_cast<double>(n) - 1.0) / 3.0));
    std::vector<double> p(n * n, 0.0), row(n);
    for (std::size_t i = 0; i < n; ++i) {
        conditional_row(d2, i, n, std::log(perp), row);
        for (std::size_t j = 0; j < n; ++j) p[i * n + j] = row[j];
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = std::max((p[i * n + j] + p[j * n + i]) / (2.0 * static_cast<double>(n)), 1e-12);
            p[i * n + j] = p[j * n + i] = s;
        }

    SplitMix rng(derive_seed(cfg.seed, 0x74736e65));
    for (auto& v : y) {
        for (auto& c : v) {
            const double u1 = std::max(rng.uniform(), 1e-300), u2 = rng.uniform();
            c = 1e-4 * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        }
    }

    std::vector<std::array<double, 2>> vel(n, {0.0, 0.0}), gains(n, {1.0, 1.0}), grad(n);
    std::vector<double> q(n * n);
    for (int it = 0; it < cfg.iterations; ++it) {
        const double exag = it < cfg.exaggeration_iters ? cfg.early_exaggeration : 1.0;
        const double momentum = it < cfg.exaggeration_iters ? 0.5 : 0.8;
        double qsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            q[i * n + i] = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = y[i][0] - y[j][0], dy = y[i][1] - y[j][1];
                const double w = 1.0 / (1.0 + dx * dx + dy * dy);
                q[i * n + j] = q[j * n + i] = w;
                qsum += 2.0 * w;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            double gx = 0.0, gy = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double w = q[i * n + j];
                const double m = (exag * p[i * n + j] - w / qsum) * w;
                gx += m * (y[i][0] - y[j][0]);
                gy += m * (y[i][1] - y[j][1]);
            }
            grad[i] = {4.0 * gx, 4.0 * gy};
        }
        for (std::size_t i = 0; i < n; ++i)
            for (int k = 0; k < 2; ++k) {
                auto& g = gains[i][k];
                g = (std::signbit(grad[i][k]) != std::signbit(vel[i][k])) ? g + 0.2 : g * 0.8;
                g = std::max(g, 0.01);
                vel[i][k] = momentum * vel[i][k] - cfg.learning_rate * g * grad[i][k];
                y[i][k] += vel[i][k];
            }
        double mx = 0.0, my = 0.0;
        for (const auto& v : y) mx += v[0], my += v[1];
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        for (auto& v : y) v[0] -= mx, v[1] -= my;
    }
    return y;
}

}  // namespace semcom::eval
