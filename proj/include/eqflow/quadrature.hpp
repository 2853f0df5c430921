#ifndef EQFLOW_QUADRATURE_HPP
#define EQFLOW_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace eqflow::quad {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre nodes by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n)
{
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

template <class F>
double integrate(const GaussRule& rule, F&& f, double a, double b)
{
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return s * half;
}

namespace detail {
template <class F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson with a relative tolerance; the absolute target is taken
/// from a coarse 16-panel pre-pass so that flat-ended integrands converge.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double rel_tol, int max_depth = 40)
{
    if (b <= a) return 0.0;
    constexpr int panels = 16;
    const double h = (b - a) / panels;
    std::vector<double> xs(2 * panels + 1), fs(2 * panels + 1);
    double coarse = 0.0;
    for (int i = 0; i <= 2 * panels; ++i) {
        xs[i] = a + 0.5 * h * i;
        fs[i] = f(xs[i]);
    }
    for (int p = 0; p < panels; ++p) coarse += h / 6.0 * (fs[2 * p] + 4.0 * fs[2 * p + 1] + fs[2 * p + 2]);
    const double abs_tol = std::max(std::abs(coarse) * rel_tol, 1e-300);
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double whole = h / 6.0 * (fs[2 * p] + 4.0 * fs[2 * p + 1] + fs[2 * p + 2]);
        total += detail::simpson_rec(f, xs[2 * p], xs[2 * p + 2], fs[2 * p], fs[2 * p + 1], fs[2 * p + 2],
                                     whole, abs_tol / panels, max_depth);
    }
    return total;
}

}  // namespace eqflow::quad

#endif
