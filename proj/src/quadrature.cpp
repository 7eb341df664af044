#include "d3lab/quadrature.hpp"

#include <numbers>

namespace d3lab::quad {

GaussLegendre::GaussLegendre(int n) : nodes_(n), weights_(n) {
    if (n < 1) throw DomainError("GaussLegendre: n must be positive");
    for (int i = 0; i < (n + 1) / 2; ++i) {
        long double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        long double dp = 0;
        for (int it = 0; it < 100; ++it) {
            long double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            const long double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-19L) break;
        }
        long double p0 = 1, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1);
        const long double w = 2 / ((1 - x * x) * dp * dp);
        nodes_[i] = -static_cast<double>(x);
        nodes_[n - 1 - i] = static_cast<double>(x);
        weights_[i] = weights_[n - 1 - i] = static_cast<double>(w);
    }
}

}  // namespace d3lab::quad
