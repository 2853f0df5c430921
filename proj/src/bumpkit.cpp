#include "eqflow/bumpkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "eqflow/quadrature.hpp"

namespace eqflow::bump {

namespace {

std::string coord_msg(const std::string& fn, std::size_t i, double v, const std::string& why)
{
    std::ostringstream os;
    os.precision(17);
    os << fn << ": coordinate x[" << i << "] = " << v << " " << why;
    return os.str();
}

void require_dim(const std::string& fn, std::span<const double> x, int dim)
{
    if (static_cast<int>(x.size()) != dim) {
        std::ostringstream os;
        os << fn << ": expected a point of dimension " << dim << ", got " << x.size();
        throw InvalidInput(os.str());
    }
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i])) throw InvalidInput(coord_msg(fn, i, x[i], "is not finite"));
}

double norm(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double transverse_radius(std::span<const double> x)
{
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * x[i];
    return std::sqrt(s);
}

}  // namespace

double psi_ext(double t)
{
    return t > 0.0 ? std::exp(-1.0 / t) : 0.0;
}

double psi(double t)
{
    if (!(t > -1.0 && t <= 1.0)) throw InvalidInput(coord_msg("psi", 0, t, "outside (-1, 1]"));
    return psi_ext(t);
}

double gamma0(double s)
{
    if (s <= -1.0 || s >= 1.0) return 0.0;
    return std::exp(1.0 / (s * s - 1.0));
}

double gamma0_prime(double s)
{
    if (s <= -1.0 || s >= 1.0) return 0.0;
    const double q = s * s - 1.0;
    return gamma0(s) * (-2.0 * s / (q * q));
}

double eta_profile(double x1, double rho, EtaBranch branch)
{
    auto inner = [&]() {
        double v = rho * rho * rho;
        const double q = x1 * x1 - 1.0;
        if (q > 0.0) v += branch == EtaBranch::negated ? std::exp(-1.0 / q) : std::exp(1.0 / q);
        return v;
    };
    const double r = std::hypot(x1, rho);
    if (r <= 2.0) return inner();
    if (r >= 3.0) return 1.0;
    const double s = smooth_step(r - 2.0);
    return (1.0 - s) * inner() + s;
}

double omega_hat1_profile(double r)
{
    if (r <= 0.5) return r * r;
    if (r >= 1.0) return 1.0;
    const double s = smooth_step((r - 0.5) / 0.5);
    return (1.0 - s) * r * r + s;
}

double v0(double x1, double s)
{
    const double g = gamma0(x1);
    const double lo = g * g;
    if (!(s > lo && s < 4.0)) return 0.0;
    return std::exp(1.0 / (lo - s) + 1.0 / (s - 4.0));
}

double vhat0(double x1, double x2)
{
    const double g = gamma0(x1);
    const double lo = g * g;
    const double s2 = x2 * x2;
    if (s2 <= lo) return 1.0;
    if (s2 >= 4.0) return 0.0;
    // exponent peaks at (lo + 4)/2 with value -4/(4 - lo)
    const double peak = -4.0 / (4.0 - lo);
    auto scaled = [&](double s) {
        if (!(s > lo && s < 4.0)) return 0.0;
        return std::exp(1.0 / (lo - s) + 1.0 / (s - 4.0) - peak);
    };
    const double num = quad::adaptive_simpson(scaled, s2, 4.0, 1e-8);
    const double den = quad::adaptive_simpson(scaled, lo, 4.0, 1e-8);
    return std::clamp(num / den, 0.0, 1.0);
}

double alpha0(const AlphaKnots& k, double x)
{
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput(coord_msg("alpha0", 0, x, "outside [0, 1]"));
    const auto it = std::upper_bound(k.knots.begin(), k.knots.end(), x);
    if (it == k.knots.begin()) return 0.0;
    const std::size_t idx = static_cast<std::size_t>(it - k.knots.begin()) - 1;
    if (k.knots[idx] == x || idx + 1 >= k.knots.size()) return 0.0;
    if (k.dense_gap[idx]) return 0.0;
    const double lo = k.knots[idx], hi = k.knots[idx + 1];
    return std::exp(1.0 / ((x - lo) * (x - hi)));
}

double GSeries::partial(double t, int n) const
{
    n = std::min(n, truncation());
    double s = 0.0;
    double w = 0.25;  // 2^{-i-1} at i = 1
    for (int i = 1; i <= n; ++i, w *= 0.5) s += w * betas[i - 1] * psi_ext(t - cs[i - 1]);
    return s;
}

GSeries GSeries::make(std::vector<double> betas, std::vector<double> cs)
{
    if (betas.empty()) throw InvalidInput("GSeries: empty beta sequence");
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!(betas[i] > 0.0) || betas[i] > 1.0)
            throw InvalidInput("GSeries: beta_" + std::to_string(i) + " must lie in (0, 1]");
        if (i > 0 && !(betas[i] < betas[i - 1]))
            throw InvalidInput("GSeries: betas must be strictly decreasing (beta_" + std::to_string(i) + ")");
    }
    if (cs.empty()) {
        for (std::size_t i = 1; i <= betas.size(); ++i) cs.push_back(1.0 / static_cast<double>(i + 1));
    }
    if (cs.size() != betas.size()) throw InvalidInput("GSeries: need one c_i per beta");
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (!(cs[i] > 0.0 && cs[i] < 1.0)) throw InvalidInput("GSeries: c_i must lie in (0, 1)");
        if (i > 0 && !(cs[i] < cs[i - 1])) throw InvalidInput("GSeries: cs must be strictly decreasing");
    }
    return GSeries{std::move(betas), std::move(cs)};
}

RadialW::RadialW(GSeries g, int dim) : g_(std::move(g)), dim_(dim)
{
    if (dim < 1) throw InvalidInput("RadialW: dimension must be positive");
    const int n = g_.truncation();
    kappa_ = std::ldexp(g_.betas[n - 1], -n - 2);
}

double RadialW::ball_bound(int i) const
{
    if (i <= 0) return 1.0;
    return g_.betas[std::min(i - 1, g_.truncation() - 1)];
}

double RadialW::profile(double r) const
{
    if (r >= 1.0) return 1.0;
    if (r <= 0.0) return 0.0;
    const double core = g_.eval(r) + kappa_ * std::exp(-1.0 / std::sqrt(r));
    if (r <= 0.5) return core;
    const double s = smooth_step((r - 0.5) / 0.5);
    return (1.0 - s) * core + s;
}

double RadialW::eval(std::span<const double> x) const
{
    return profile(norm(x));
}

RadialW build_w(std::vector<double> betas, int dim)
{
    return RadialW(GSeries::make(std::move(betas)), dim);
}

namespace {

// Uniform point with r^dim uniform in [lo^dim, hi^dim].
std::vector<double> shell_point(std::mt19937_64& rng, int dim, double lo, double hi)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> x(static_cast<std::size_t>(dim));
    double len = 0.0;
    while (len < 1e-12) {
        len = 0.0;
        for (double& v : x) {
            v = gauss(rng);
            len += v * v;
        }
        len = std::sqrt(len);
    }
    const double a = std::pow(lo, dim), b = std::pow(hi, dim);
    const double r = std::pow(a + (b - a) * unit(rng), 1.0 / dim);
    for (double& v : x) v *= r / len;
    return x;
}

}  // namespace

WAudit audit_w(const RadialW& w, std::size_t samples_per_ball, unsigned long long seed)
{
    std::mt19937_64 rng(seed);
    const int d = w.dim();
    WAudit a;
    const std::vector<double> origin(static_cast<std::size_t>(d), 0.0);
    a.zero_only_at_origin = w.eval(origin) == 0.0;
    for (std::size_t k = 0; k < samples_per_ball && a.zero_only_at_origin; ++k) {
        const auto x = shell_point(rng, d, 0.0, 2.0);
        if (norm(x) > 0.0 && !(w.eval(x) > 0.0)) a.zero_only_at_origin = false;
    }
    a.unit_annulus = true;
    for (std::size_t k = 0; k < samples_per_ball; ++k)
        if (w.eval(shell_point(rng, d, 1.0, 2.0)) != 1.0) a.unit_annulus = false;
    a.ball_bounds = true;
    for (int i = 1; i <= w.series().truncation(); ++i) {
        double sup = 0.0;
        for (std::size_t k = 0; k < samples_per_ball; ++k)
            sup = std::max(sup, w.eval(shell_point(rng, d, 0.0, 1.0 / (i + 1))));
        a.ball_sup.push_back(sup);
        if (sup > w.ball_bound(i)) a.ball_bounds = false;
    }
    return a;
}

std::string kind_name(Kind k)
{
    switch (k) {
    case Kind::psi: return "psi";
    case Kind::gamma0: return "gamma0";
    case Kind::alpha0: return "alpha0";
    case Kind::eta: return "eta";
    case Kind::omegaHat1: return "omegaHat1";
    case Kind::vhat0: return "vhat0";
    case Kind::gseries: return "gseries";
    case Kind::radialW: return "radialW";
    case Kind::custom: return "custom";
    }
    return "unknown";
}

SmoothFn::SmoothFn(Kind k, std::string name, int dim, Rule rule, Domain domain, bool axis)
    : kind_(k), name_(std::move(name)), dim_(dim), rule_(std::move(rule)), domain_(std::move(domain)),
      axis_singular_(axis)
{
}

double SmoothFn::eval(std::span<const double> x) const
{
    require_dim(name_, x, dim_);
    if (domain_) domain_(x);
    return rule_(x);
}

bool SmoothFn::in_domain(std::span<const double> x) const
{
    try {
        require_dim(name_, x, dim_);
        if (domain_) domain_(x);
    } catch (const InvalidInput&) {
        return false;
    }
    return true;
}

SmoothFn SmoothFn::make_psi()
{
    return SmoothFn(
        Kind::psi, "psi", 1, [](std::span<const double> x) { return psi_ext(x[0]); },
        [](std::span<const double> x) {
            if (!(x[0] > -1.0 && x[0] <= 1.0)) throw InvalidInput(coord_msg("psi", 0, x[0], "outside (-1, 1]"));
        },
        false);
}

SmoothFn SmoothFn::make_gamma0()
{
    return SmoothFn(Kind::gamma0, "gamma0", 1, [](std::span<const double> x) { return gamma0(x[0]); }, {},
                    false);
}

SmoothFn SmoothFn::make_alpha0(AlphaKnots knots)
{
    if (knots.knots.size() < 2 || knots.knots.front() != 0.0 || knots.knots.back() != 1.0 ||
        knots.dense_gap.size() + 1 != knots.knots.size())
        throw InvalidInput("alpha0: knots must run from 0 to 1 with one gap flag per interval");
    for (std::size_t i = 1; i < knots.knots.size(); ++i)
        if (!(knots.knots[i] > knots.knots[i - 1])) throw InvalidInput("alpha0: knots must be strictly increasing");
    auto shared = std::make_shared<const AlphaKnots>(std::move(knots));
    return SmoothFn(
        Kind::alpha0, "alpha0", 1, [shared](std::span<const double> x) { return alpha0(*shared, x[0]); },
        [](std::span<const double> x) {
            if (!(x[0] >= 0.0 && x[0] <= 1.0)) throw InvalidInput(coord_msg("alpha0", 0, x[0], "outside [0, 1]"));
        },
        false);
}

SmoothFn SmoothFn::make_eta(int dim, EtaBranch branch)
{
    if (dim < 2) throw InvalidInput("eta: dimension must be at least 2");
    return SmoothFn(
        Kind::eta, "eta", dim,
        [branch](std::span<const double> x) { return eta_profile(x[0], transverse_radius(x), branch); }, {},
        true);
}

SmoothFn SmoothFn::make_omega_hat1(int dim)
{
    if (dim < 1) throw InvalidInput("omegaHat1: dimension must be positive");
    return SmoothFn(Kind::omegaHat1, "omegaHat1", dim,
                    [](std::span<const double> x) { return omega_hat1_profile(norm(x)); }, {}, false);
}

SmoothFn SmoothFn::make_vhat0()
{
    return SmoothFn(Kind::vhat0, "vhat0", 2, [](std::span<const double> x) { return vhat0(x[0], x[1]); }, {},
                    false);
}

SmoothFn SmoothFn::make_gseries(GSeries g)
{
    auto shared = std::make_shared<const GSeries>(std::move(g));
    return SmoothFn(
        Kind::gseries, "gseries", 1, [shared](std::span<const double> x) { return shared->eval(x[0]); },
        [](std::span<const double> x) {
            if (!(x[0] >= -1.0 && x[0] <= 2.0)) throw InvalidInput(coord_msg("gseries", 0, x[0], "outside [-1, 2]"));
        },
        false);
}

SmoothFn SmoothFn::make_radial_w(RadialW w)
{
    const int dim = w.dim();
    auto shared = std::make_shared<const RadialW>(std::move(w));
    return SmoothFn(
        Kind::radialW, "radialW", dim, [shared](std::span<const double> x) { return shared->eval(x); },
        [](std::span<const double> x) {
            if (norm(x) > 2.0) {
                std::size_t worst = 0;
                for (std::size_t i = 1; i < x.size(); ++i)
                    if (std::abs(x[i]) > std::abs(x[worst])) worst = i;
                throw InvalidInput(coord_msg("radialW", worst, x[worst], "puts the point outside the ball of radius 2"));
            }
        },
        false);
}

SmoothFn SmoothFn::make_custom(std::string name, int dim, Rule rule, Domain domain, bool axis_singular)
{
    if (dim < 1) throw InvalidInput("custom: dimension must be positive");
    return SmoothFn(Kind::custom, std::move(name), dim, std::move(rule), std::move(domain), axis_singular);
}

double deriv(const SmoothFn& f, std::span<const double> x, int order, double step, std::span<const double> direction)
{
    if (order < 1 || order > 4) throw InvalidInput("deriv: order must be in 1..4");
    if (!(step > 0.0)) throw InvalidInput("deriv: step must be positive");
    const std::size_t d = x.size();
    std::vector<double> dir(d, 0.0);
    if (direction.empty()) {
        if (d > 0) dir[0] = 1.0;
    } else {
        if (direction.size() != d) throw InvalidInput("deriv: direction dimension mismatch");
        double n = 0.0;
        for (double v : direction) n += v * v;
        n = std::sqrt(n);
        if (!(n > 0.0)) throw InvalidInput("deriv: zero direction");
        for (std::size_t i = 0; i < d; ++i) dir[i] = direction[i] / n;
    }
    std::vector<double> p(d);
    auto at = [&](int k) {
        for (std::size_t i = 0; i < d; ++i) p[i] = x[i] + k * step * dir[i];
        if (!f.in_domain(p)) {
            std::ostringstream os;
            os << "deriv: finite-difference stencil of " << f.name() << " leaves the domain (offset " << k
               << " * " << step << ")";
            throw InvalidInput(os.str());
        }
        return f.eval(p);
    };
    const double h = step;
    switch (order) {
    case 1: return (at(1) - at(-1)) / (2.0 * h);
    case 2: return (at(1) - 2.0 * at(0) + at(-1)) / (h * h);
    case 3: return (at(2) - 2.0 * at(1) + 2.0 * at(-1) - at(-2)) / (2.0 * h * h * h);
    default: return (at(2) - 4.0 * at(1) + 6.0 * at(0) - 4.0 * at(-1) + at(-2)) / (h * h * h * h);
    }
}

FlatnessReport flatness_report(const SmoothFn& f, std::span<const double> x0, int max_order, std::vector<double> steps)
{
    if (max_order < 1 || max_order > 4) throw InvalidInput("flatness_report: maxOrder must be in 1..4");
    FlatnessReport rep;
    rep.steps = std::move(steps);
    rep.pass = true;
    for (int k = 1; k <= max_order; ++k) {
        FlatnessReport::Order o;
        o.order = k;
        o.pass = true;
        for (double h : rep.steps) {
            const double m = std::abs(deriv(f, x0, k, h));
            o.magnitudes.push_back(m);
            if (!(m <= 10.0 * h)) o.pass = false;
        }
        rep.pass = rep.pass && o.pass;
        rep.orders.push_back(std::move(o));
    }
    return rep;
}

double sphere_area(int dim)
{
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

double ball_volume(int dim, double radius)
{
    return std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0) * std::pow(radius, dim);
}

namespace {

constexpr int kDecades = 14;

// Decade increments shrinking by at least half mean the tail is summable.
ReciprocalIntegral settle(std::vector<double> increments)
{
    ReciprocalIntegral out;
    double total = 0.0;
    for (double inc : increments) {
        total += inc;
        out.refinements.push_back(total);
    }
    const std::size_t n = increments.size();
    const double last = increments[n - 1], prev = increments[n - 2];
    if (!std::isfinite(total)) {
        out.diverged = true;
        return out;
    }
    if (last <= 1e-15 * std::max(total, 1e-300)) {
        out.value = total;
        return out;
    }
    const double q = last / prev;
    if (!(q < 0.5)) {
        out.diverged = true;
        return out;
    }
    out.value = total + last * q / (1.0 - q);
    return out;
}

std::vector<std::vector<double>> directions(int dim, int count)
{
    std::vector<std::vector<double>> dirs;
    if (dim == 1) return {{1.0}, {-1.0}};
    std::mt19937_64 rng(20240611);
    std::normal_distribution<double> nd;
    for (int k = 0; k < count; ++k) {
        std::vector<double> u(dim);
        double n = 0.0;
        for (auto& v : u) {
            v = nd(rng);
            n += v * v;
        }
        n = std::sqrt(n);
        for (auto& v : u) v /= n;
        dirs.push_back(std::move(u));
    }
    return dirs;
}

}  // namespace

ReciprocalIntegral integral_reciprocal(const SmoothFn& f, double ball_radius, int resolution)
{
    if (!(ball_radius > 0.0)) throw InvalidInput("integral_reciprocal: ball radius must be positive");
    if (resolution < 4) throw InvalidInput("integral_reciprocal: resolution must be at least 4");
    const int d = f.dim();
    const auto rule = quad::gauss_legendre(resolution);
    std::vector<double> inc(kDecades, 0.0);

    if (!f.axis_singular() || d < 2) {
        const auto dirs = directions(d, std::max(resolution, 16));
        const double area = d == 1 ? 2.0 : sphere_area(d);
        std::vector<double> p(d);
        auto shell = [&](double r) {
            double acc = 0.0;
            for (const auto& u : dirs) {
                for (int i = 0; i < d; ++i) p[i] = r * u[i];
                acc += 1.0 / f.eval(p);
            }
            return area * std::pow(r, d - 1) * acc / static_cast<double>(dirs.size());
        };
        for (int k = 0; k < kDecades; ++k) {
            const double hi = std::log(ball_radius) - k * std::log(10.0);
            const double lo = hi - std::log(10.0);
            inc[k] = quad::integrate(rule, [&](double u) { const double r = std::exp(u); return shell(r) * r; }, lo, hi);
        }
        return settle(std::move(inc));
    }

    // axis-singular: cylindrical shells around the x1 axis
    const int transverse = d - 1;
    const double area = transverse == 1 ? 2.0 : sphere_area(transverse);
    std::vector<double> p(d, 0.0);
    for (int k = 0; k < kDecades; ++k) {
        auto slab = [&](double x1) {
            const double rmax = std::sqrt(std::max(0.0, ball_radius * ball_radius - x1 * x1));
            if (rmax <= 0.0) return 0.0;
            const double hi = std::log(rmax) - k * std::log(10.0);
            const double lo = hi - std::log(10.0);
            return quad::integrate(
                rule,
                [&](double u) {
                    const double rho = std::exp(u);
                    p[0] = x1;
                    p[1] = rho;
                    return area * std::pow(rho, transverse - 1) / f.eval(p) * rho;
                },
                lo, hi);
        };
        // x1 = R sin(theta) keeps the slab endpoints smooth
        inc[k] = quad::integrate(
            rule, [&](double th) { return slab(ball_radius * std::sin(th)) * ball_radius * std::cos(th); },
            -0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
    }
    return settle(std::move(inc));
}

}  // namespace eqflow::bump
