#ifndef EQFLOW_BUMPKIT_HPP
#define EQFLOW_BUMPKIT_HPP

// Explicit smooth scalar functions: the flat bumps Psi, gamma0, alpha0, the
// slow-down profile w built from a g-series, eta, omegaHat1 and vhat0, with
// finite-difference derivative access and flatness checks.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eqflow/common.hpp"

namespace eqflow::bump {

/// e^{-1/t} on (0,1], 0 on (-1,0]. Throws InvalidInput outside (-1,1].
double psi(double t);
/// psi continued to the whole line (0 for t <= 0, e^{-1/t} for t > 0).
double psi_ext(double t);

/// e^{1/(s^2-1)} on (-1,1), 0 elsewhere.
double gamma0(double s);
double gamma0_prime(double s);

enum class EtaBranch {
    negated,  ///< rho^3 + e^{-1/(x1^2-1)} for |x1| > 1 (bounded, flat at |x1| = 1)
    printed   ///< rho^3 + e^{+1/(x1^2-1)}; blows up as |x1| -> 1+
};

/// eta as a function of the axial coordinate x1 and transverse radius rho.
/// Inside |x| <= 2 it is the defining formula; on 2 < |x| < 3 it blends
/// smoothly to 1, and it is identically 1 for |x| >= 3.
double eta_profile(double x1, double rho, EtaBranch branch = EtaBranch::negated);

/// |x|^2 for |x| <= 1/2, smooth blend to 1 on (1/2, 1), 1 beyond.
double omega_hat1_profile(double r);

/// v0(x1, s) = exp(1/(gamma0^2 - s) + 1/(s - 4)) on gamma0^2 < s < 4.
double v0(double x1, double s);

/// Ratio of tail integrals of v0: 1 for |x2| <= gamma0(x1), 0 for |x2| >= 2.
/// Integrals use adaptive Simpson (relative tolerance 1e-8) on the
/// integrand rescaled by its maximum, so nothing underflows prematurely.
double vhat0(double x1, double x2);

/// Knot layout for alpha0 on [0,1] in the variable x = r^2. Between two
/// consecutive knots alpha0 is the flat bump e^{1/((x-k0)(x-k1))}; gaps
/// flagged dense are runs of knots too fine to resolve in double precision,
/// on which alpha0 underflows and is returned as exact 0.
struct AlphaKnots {
    std::vector<double> knots;    ///< strictly increasing, knots.front() == 0, knots.back() == 1
    std::vector<bool> dense_gap;  ///< size knots.size() - 1
};

double alpha0(const AlphaKnots& k, double x);

/// Truncated series g(t) = sum_{i=1..N} 2^{-i-1} beta_{i-1} Psi(t - c_i).
struct GSeries {
    std::vector<double> betas;  ///< beta_0 .. beta_{N-1}
    std::vector<double> cs;     ///< cs[i-1] = c_i, i = 1..N

    int truncation() const { return static_cast<int>(betas.size()); }
    /// Partial sum over the first n terms.
    double partial(double t, int n) const;
    double eval(double t) const { return partial(t, truncation()); }

    /// Validates monotonicity; c_i defaults to 1/(i+1).
    static GSeries make(std::vector<double> betas, std::vector<double> cs = {});
};

/// w(x) = G(|x|) on the closed ball of radius 2.
///
/// G is the g-series plus a flat tail kappa * e^{-1/sqrt(r)} standing in for
/// the truncated remainder (so that w > 0 away from the origin), blended to 1
/// on [1/2, 1] and equal to 1 on [1, 2].
class RadialW {
public:
    RadialW(GSeries g, int dim);

    double profile(double r) const;
    double eval(std::span<const double> x) const;
    int dim() const { return dim_; }
    const GSeries& series() const { return g_; }
    double tail_scale() const { return kappa_; }
    /// beta_{i-1} with beta_{-1} = 1; the bound on the ball of radius 1/(i+1).
    double ball_bound(int i) const;

private:
    GSeries g_;
    int dim_;
    double kappa_;
};

RadialW build_w(std::vector<double> betas, int dim);

/// Sampled check of the three defining properties of w: zero exactly at the
/// origin and positive elsewhere in the ball of radius 2, identically 1 on
/// 1 <= |x| <= 2, and at most beta_{i-1} on the ball of radius 1/(i+1).
struct WAudit {
    bool zero_only_at_origin = false;
    bool unit_annulus = false;
    bool ball_bounds = false;
    std::vector<double> ball_sup;  ///< sampled sup on the ball of radius 1/(i+1), i = 1..N
    bool pass() const { return zero_only_at_origin && unit_annulus && ball_bounds; }
};

WAudit audit_w(const RadialW& w, std::size_t samples_per_ball = 10000, unsigned long long seed = 1);

enum class Kind { psi, gamma0, alpha0, eta, omegaHat1, vhat0, gseries, radialW, custom };

std::string kind_name(Kind k);

/// A named smooth scalar function with a declared domain. Immutable.
class SmoothFn {
public:
    using Rule = std::function<double(std::span<const double>)>;
    using Domain = std::function<void(std::span<const double>)>;  ///< throws InvalidInput

    static SmoothFn make_psi();
    static SmoothFn make_gamma0();
    static SmoothFn make_alpha0(AlphaKnots knots);
    static SmoothFn make_eta(int dim, EtaBranch branch = EtaBranch::negated);
    static SmoothFn make_omega_hat1(int dim);
    static SmoothFn make_vhat0();
    static SmoothFn make_gseries(GSeries g);
    static SmoothFn make_radial_w(RadialW w);
    /// Singular structure used by integral_reciprocal: zeros at a point
    /// (the origin) unless axis_singular is set (zeros along the x1 axis).
    static SmoothFn make_custom(std::string name, int dim, Rule rule, Domain domain = {},
                                bool axis_singular = false);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    const std::string& name() const { return name_; }
    bool axis_singular() const { return axis_singular_; }

    /// Checks the domain, then evaluates. Throws InvalidInput naming the
    /// offending coordinate.
    double eval(std::span<const double> x) const;
    double eval(double t) const { return eval(std::span<const double>(&t, 1)); }
    bool in_domain(std::span<const double> x) const;

private:
    SmoothFn(Kind k, std::string name, int dim, Rule rule, Domain domain, bool axis);

    Kind kind_;
    std::string name_;
    int dim_;
    Rule rule_;
    Domain domain_;
    bool axis_singular_ = false;
};

/// Central finite-difference estimate of the order-th directional derivative
/// (order 1..4) along `direction` (default e1). Throws InvalidInput when the
/// stencil leaves the domain.
double deriv(const SmoothFn& f, std::span<const double> x, int order, double step,
             std::span<const double> direction = {});
inline double deriv(const SmoothFn& f, double x, int order, double step)
{
    return deriv(f, std::span<const double>(&x, 1), order, step);
}

struct FlatnessReport {
    struct Order {
        int order = 0;
        std::vector<double> magnitudes;  ///< one per step
        bool pass = false;
    };
    std::vector<double> steps;
    std::vector<Order> orders;
    bool pass = false;
};

/// An order passes when every difference magnitude is at most 10 * step.
FlatnessReport flatness_report(const SmoothFn& f, std::span<const double> x0, int max_order,
                               std::vector<double> steps = {1e-2, 1e-3, 1e-4});
inline FlatnessReport flatness_report(const SmoothFn& f, double x0, int max_order,
                                      std::vector<double> steps = {1e-2, 1e-3, 1e-4})
{
    return flatness_report(f, std::span<const double>(&x0, 1), max_order, std::move(steps));
}

struct ReciprocalIntegral {
    bool diverged = false;
    double value = 0.0;               ///< meaningful only when !diverged
    std::vector<double> refinements;  ///< partial integrals as the inner cutoff shrinks
};

/// Shell quadrature of 1/f over the ball of radius ball_radius, refined
/// decade by decade towards the zero set of f (the origin, or the x1 axis for
/// axis-singular functions). `resolution` is the Gauss-Legendre node count
/// per decade.
ReciprocalIntegral integral_reciprocal(const SmoothFn& f, double ball_radius, int resolution = 32);

double ball_volume(int dim, double radius);
double sphere_area(int dim);  ///< area of the unit sphere in R^dim

}  // namespace eqflow::bump

#endif
