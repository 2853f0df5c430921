#include "eqflow/suspension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "eqflow/quadrature.hpp"

namespace eqflow::susp {

double wrap01(double v)
{
    double r = v - std::floor(v);
    if (r >= 1.0) r = 0.0;
    return r;
}

double wrapped_diff(double a, double b)
{
    double d = a - b;
    d -= std::floor(d + 0.5);
    return d;
}

double torus_distance(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(wrapped_diff(a[i], b[i])));
    return m;
}

BaseMap BaseMap::circle_rotation(double angle)
{
    if (!std::isfinite(angle)) throw InvalidInput("circle rotation: angle must be finite");
    BaseMap b;
    b.variant_ = Variant::circleRotation;
    b.dim_ = 1;
    b.angle_ = wrap01(angle);
    b.name_ = "circleRotation";
    const double a = b.angle_;
    b.fwd_ = [a](std::span<const double> y, std::span<double> out) { out[0] = wrap01(y[0] + a); };
    b.inv_map_ = [a](std::span<const double> y, std::span<double> out) { out[0] = wrap01(y[0] - a); };
    return b;
}

BaseMap BaseMap::golden_rotation()
{
    return circle_rotation((std::sqrt(5.0) - 1.0) / 2.0);
}

BaseMap BaseMap::torus_automorphism(std::array<long long, 4> m)
{
    const long long det = m[0] * m[3] - m[1] * m[2];
    if (det != 1 && det != -1)
        throw InvalidInput("torus automorphism: matrix must be unimodular (det = " + std::to_string(det) + ")");
    BaseMap b;
    b.variant_ = Variant::torusAutomorphism;
    b.dim_ = 2;
    b.m_ = m;
    b.inv_ = {det * m[3], -det * m[1], -det * m[2], det * m[0]};
    b.name_ = "torusAutomorphism";
    auto lin = [](const std::array<long long, 4>& a) {
        return [a](std::span<const double> y, std::span<double> out) {
            const double u = static_cast<double>(a[0]) * y[0] + static_cast<double>(a[1]) * y[1];
            const double v = static_cast<double>(a[2]) * y[0] + static_cast<double>(a[3]) * y[1];
            out[0] = wrap01(u);
            out[1] = wrap01(v);
        };
    };
    b.fwd_ = lin(b.m_);
    b.inv_map_ = lin(b.inv_);
    return b;
}

BaseMap BaseMap::identity(int dim)
{
    if (dim < 1) throw InvalidInput("identity base: dimension must be positive");
    BaseMap b;
    b.variant_ = Variant::identity;
    b.dim_ = dim;
    b.name_ = "identity";
    auto id = [](std::span<const double> y, std::span<double> out) {
        for (std::size_t i = 0; i < y.size(); ++i) out[i] = wrap01(y[i]);
    };
    b.fwd_ = id;
    b.inv_map_ = id;
    return b;
}

BaseMap BaseMap::custom(int dim, Map forward, Map inverse, std::string name)
{
    if (dim < 1) throw InvalidInput("custom base: dimension must be positive");
    if (!forward || !inverse) throw InvalidInput("custom base: both directions are required");
    BaseMap b;
    b.variant_ = Variant::custom;
    b.dim_ = dim;
    b.name_ = std::move(name);
    b.fwd_ = std::move(forward);
    b.inv_map_ = std::move(inverse);
    return b;
}

void BaseMap::apply(std::span<const double> y, std::span<double> out) const
{
    fwd_(y, out);
}

void BaseMap::apply_inverse(std::span<const double> y, std::span<double> out) const
{
    inv_map_(y, out);
}

State BaseMap::apply(const State& y) const
{
    State out(y.size());
    fwd_(y, out);
    return out;
}

State BaseMap::apply_inverse(const State& y) const
{
    State out(y.size());
    inv_map_(y, out);
    return out;
}

namespace {

struct Eigen2 {
    bool real = false;
    double lambda = 0.0;  ///< eigenvalue of largest modulus (real case)
    double modulus = 1.0;
};

Eigen2 leading_eigen(const std::array<long long, 4>& m)
{
    const double a = static_cast<double>(m[0]), b = static_cast<double>(m[1]), c = static_cast<double>(m[2]),
                 d = static_cast<double>(m[3]);
    const double tr = a + d, det = a * d - b * c;
    const double disc = tr * tr - 4.0 * det;
    Eigen2 e;
    if (disc < 0.0) {
        e.modulus = std::sqrt(std::abs(det));
        return e;
    }
    const double r = std::sqrt(disc);
    const double l1 = 0.5 * (tr + r), l2 = 0.5 * (tr - r);
    e.real = true;
    e.lambda = std::abs(l1) >= std::abs(l2) ? l1 : l2;
    e.modulus = std::abs(e.lambda);
    return e;
}

}  // namespace

State BaseMap::unstable_direction() const
{
    State u(static_cast<std::size_t>(dim_), 0.0);
    u[0] = 1.0;
    if (variant_ != Variant::torusAutomorphism) return u;
    const Eigen2 e = leading_eigen(m_);
    if (!e.real) return u;
    const double a = static_cast<double>(m_[0]), b = static_cast<double>(m_[1]), c = static_cast<double>(m_[2]),
                 d = static_cast<double>(m_[3]);
    if (b != 0.0) u = {b, e.lambda - a};
    else if (c != 0.0) u = {e.lambda - d, c};
    else u = std::abs(a) >= std::abs(d) ? State{1.0, 0.0} : State{0.0, 1.0};
    const double n = norm2(u);
    for (double& v : u) v /= n;
    return u;
}

double BaseMap::log_spectral_radius() const
{
    if (variant_ != Variant::torusAutomorphism) return 0.0;
    return std::max(0.0, std::log(leading_eigen(m_).modulus));
}

SuspensionSpace::SuspensionSpace(BaseMap base) : base_(std::move(base)) {}

State SuspensionSpace::normalize(State q) const
{
    const std::size_t d = static_cast<std::size_t>(base_.dim());
    if (q.size() < d + 1) throw InvalidInput("suspension: point needs " + std::to_string(d + 1) + " coordinates");
    if (!std::isfinite(q[d])) throw InvalidInput("suspension: height coordinate is not finite");
    std::span<double> y(q.data(), d);
    for (double& v : y) v = wrap01(v);
    State tmp(d);
    while (q[d] >= 1.0) {
        base_.apply(y, tmp);
        std::copy(tmp.begin(), tmp.end(), y.begin());
        q[d] -= 1.0;
    }
    while (q[d] < 0.0) {
        base_.apply_inverse(y, tmp);
        std::copy(tmp.begin(), tmp.end(), y.begin());
        q[d] += 1.0;
    }
    return q;
}

double SuspensionSpace::distance(std::span<const double> a, std::span<const double> b) const
{
    const std::size_t d = static_cast<std::size_t>(base_.dim());
    const double ds = a[d] - b[d];
    const double d0 = std::max(torus_distance(a.first(d), b.first(d)), std::abs(ds));
    if (std::abs(ds) < 0.5) return d0;
    // the lower point also sits one level up over the preimage of its base point
    const bool a_low = ds < 0.0;
    std::span<const double> low = a_low ? a : b, high = a_low ? b : a;
    State pre(d);
    base_.apply_inverse(low.first(d), pre);
    const double d1 = std::max(torus_distance(pre, high.first(d)), std::abs(low[d] + 1.0 - high[d]));
    return std::min(d0, d1);
}

State SuspensionSpace::displacement(std::span<const double> p, std::span<const double> q) const
{
    const std::size_t d = static_cast<std::size_t>(base_.dim());
    State best, cand(d + 1), img(d);
    double best_n = std::numeric_limits<double>::infinity();
    auto consider = [&](std::span<const double> y, double s) {
        for (std::size_t i = 0; i < d; ++i) cand[i] = wrapped_diff(y[i], p[i]);
        cand[d] = s - p[d];
        const double n = norm2(cand);
        if (n < best_n) {
            best_n = n;
            best = cand;
        }
    };
    consider(q.first(d), q[d]);
    base_.apply_inverse(q.first(d), img);
    consider(img, q[d] + 1.0);
    base_.apply(q.first(d), img);
    consider(img, q[d] - 1.0);
    return best;
}

SlowDownSpec SlowDownSpec::make(const SuspensionSpace& space, State center, std::vector<double> betas,
                                double chart_radius)
{
    if (!(chart_radius > 0.0 && chart_radius <= 0.5)) throw InvalidInput("slow-down: chart radius must lie in (0, 1/2]");
    if (static_cast<int>(center.size()) != space.dim()) throw InvalidInput("slow-down: centre has wrong dimension");
    SlowDownSpec s;
    s.center = space.normalize(std::move(center));
    s.profile = std::make_shared<const bump::RadialW>(bump::build_w(std::move(betas), space.dim()));
    s.chart_radius = chart_radius;
    return s;
}

double SlowDownSpec::alpha(const SuspensionSpace& space, std::span<const double> q) const
{
    const State xi = space.displacement(center, q);
    const double r = norm2(xi) / chart_radius;
    if (r >= 1.0) return 1.0;
    return profile->profile(r);
}

namespace {

sim::FlowField fiber_field(int base_dim, Observable alpha, const Observable* extra)
{
    const std::size_t d = static_cast<std::size_t>(base_dim);
    if (extra) {
        Observable a = *extra;
        return sim::FlowField(
            base_dim + 2,
            [d, alpha, a](std::span<const double> x, std::span<double> out) {
                std::fill(out.begin(), out.end(), 0.0);
                const auto q = x.first(d + 1);
                out[d] = alpha(q);
                out[d + 1] = a(q);
            },
            {}, "suspension+theta");
    }
    return sim::FlowField(
        base_dim + 1,
        [d, alpha](std::span<const double> x, std::span<double> out) {
            std::fill(out.begin(), out.end(), 0.0);
            out[d] = alpha(x);
        },
        {}, "suspension");
}

// Fiber-by-fiber integration; extra trailing coordinates ride along untouched by the seam.
AdvanceResult run_fibers(const SuspensionSpace& space, const sim::FlowField& field, State x, double t,
                         const sim::IntegratorOptions& opt, const sim::Observer& observer)
{
    if (!(t >= 0.0)) throw InvalidInput("suspension flow: time must be nonnegative");
    const std::size_t d = static_cast<std::size_t>(space.base().dim());
    {
        State head(x.begin(), x.begin() + static_cast<long>(d + 1));
        head = space.normalize(std::move(head));
        std::copy(head.begin(), head.end(), x.begin());
    }
    sim::IntegratorOptions o = opt;
    if (o.stagnation_speed <= 0.0) o.stagnation_speed = 1e-300;
    const sim::Event seam{[d](std::span<const double> v) { return v[d] - 1.0; }, +1};
    AdvanceResult res;
    double remaining = t;
    State img(d);
    while (remaining > 0.0) {
        const sim::RunResult run = sim::advance(field, x, 0.0, remaining, o, observer, {}, &seam);
        remaining -= run.t;
        res.t += run.t;
        x = run.x;
        if (run.stop == sim::StopReason::event) {
            space.base().apply(std::span<const double>(x.data(), d), img);
            std::copy(img.begin(), img.end(), x.begin());
            x[d] = 0.0;
            ++res.seam_crossings;
            continue;
        }
        if (run.stop == sim::StopReason::completed) {
            res.t = t;
            break;
        }
        if (run.stop == sim::StopReason::observer) break;
        res.stalled = true;
        break;
    }
    res.q = std::move(x);
    return res;
}

}  // namespace

SuspendedFlow::SuspendedFlow(SuspensionSpace space, Observable alpha, std::string name, std::optional<double> constant)
    : space_(std::move(space)),
      alpha_(std::move(alpha)),
      name_(std::move(name)),
      constant_(constant),
      field_(fiber_field(space_.base().dim(), alpha_, nullptr))
{
}

AdvanceResult SuspendedFlow::advance(const State& q, double t, const sim::IntegratorOptions& opt,
                                     const sim::Observer& observer) const
{
    if (constant_ && !observer) {
        if (!(t >= 0.0)) throw InvalidInput("suspension flow: time must be nonnegative");
        State x = space_.normalize(q);
        const std::size_t d = static_cast<std::size_t>(space_.base().dim());
        const double s = x[d] + *constant_ * t;
        const double k = std::floor(s);
        AdvanceResult res;
        res.seam_crossings = static_cast<long>(k);
        x[d] = s - k;
        State img(d);
        for (long i = 0; i < res.seam_crossings; ++i) {
            space_.base().apply(std::span<const double>(x.data(), d), img);
            std::copy(img.begin(), img.end(), x.begin());
        }
        if (x[d] >= 1.0) x = space_.normalize(std::move(x));
        res.q = std::move(x);
        res.t = t;
        return res;
    }
    return run_fibers(space_, field_, q, t, opt, observer);
}

SuspendedFlow suspend(const BaseMap& base)
{
    return reparam(SuspensionSpace(base), 1.0);
}

SuspendedFlow reparam(const SuspensionSpace& space, double constant_speed)
{
    if (!(constant_speed > 0.0) || !std::isfinite(constant_speed))
        throw InvalidInput("reparam: constant speed must be positive");
    return SuspendedFlow(
        space, [constant_speed](std::span<const double>) { return constant_speed; },
        constant_speed == 1.0 ? "unit" : "constant", constant_speed);
}

SuspendedFlow reparam(const SuspensionSpace& space, Observable alpha, std::string name)
{
    if (!alpha) throw InvalidInput("reparam: speed function is required");
    // probe a coarse grid of the fundamental domain for negative speeds
    const int d = space.base().dim();
    const int per_axis = d == 1 ? 64 : 16;
    const int total = static_cast<int>(std::pow(per_axis, d + 1));
    State q(static_cast<std::size_t>(d + 1));
    for (int idx = 0; idx < total; ++idx) {
        int rest = idx;
        for (int k = 0; k <= d; ++k) {
            q[static_cast<std::size_t>(k)] = (rest % per_axis + 0.5) / per_axis;
            rest /= per_axis;
        }
        const double v = alpha(q);
        if (!(v >= 0.0)) throw InvalidInput("reparam: speed is negative or undefined at a probe point");
    }
    return SuspendedFlow(space, std::move(alpha), std::move(name));
}

SuspendedFlow reparam(const SuspensionSpace& space, const SlowDownSpec& spec)
{
    auto shared = std::make_shared<const SlowDownSpec>(spec);
    auto sp = std::make_shared<const SuspensionSpace>(space);
    return SuspendedFlow(
        space, [shared, sp](std::span<const double> q) { return shared->alpha(*sp, q); }, "slowdown");
}

GammaResult gamma_return(const SuspendedFlow& flow, const State& y, double time_cap)
{
    const std::size_t d = static_cast<std::size_t>(flow.space().base().dim());
    if (y.size() != d) throw InvalidInput("gamma_return: base point has wrong dimension");
    State x(d + 1, 0.0);
    for (std::size_t i = 0; i < d; ++i) x[i] = wrap01(y[i]);
    if (auto c = flow.constant_speed()) return GammaResult{1.0 / *c, false};
    sim::IntegratorOptions o;
    o.tol = 1e-10;
    o.stagnation_speed = 1e-300;
    const sim::Event seam{[d](std::span<const double> v) { return v[d] - 1.0; }, +1};
    const sim::RunResult run = sim::advance(flow.field(), x, 0.0, time_cap, o, {}, {}, &seam);
    if (run.stop == sim::StopReason::event) return GammaResult{run.t, false};
    return GammaResult{std::numeric_limits<double>::infinity(), true};
}

double theta(const SuspendedFlow& flow, const Observable& a, const State& q, double t,
             const sim::IntegratorOptions& opt)
{
    const int d = flow.space().base().dim();
    const sim::FlowField aug = fiber_field(d, [&flow](std::span<const double> x) { return flow.speed(x); }, &a);
    State x(q.begin(), q.end());
    x.resize(static_cast<std::size_t>(d + 2));
    x[static_cast<std::size_t>(d + 1)] = 0.0;
    const AdvanceResult r = run_fibers(flow.space(), aug, x, t, opt, {});
    return r.q[static_cast<std::size_t>(d + 1)];
}

sim::OccupancyResult occupation(const SuspendedFlow& flow, const State& q, double t, const sim::Region& region,
                                const sim::IntegratorOptions& opt)
{
    sim::OccupancyResult res;
    const AdvanceResult r = run_fibers(flow.space(), flow.field(), q, t, opt, [&](const sim::Segment& seg) {
        sim::accumulate_occupation(seg, region, {}, res);
        return true;
    });
    res.t_total = r.t;
    res.J = std::min(res.J, res.t_total);
    return res;
}

AverageResult suspended_average(const SuspensionSpace& space, const Observable& a, const Observable& g,
                                double orbit_length, const State& q)
{
    if (!(orbit_length > 0.0)) throw InvalidInput("suspended_average: orbit length must be positive");
    static const quad::GaussRule rule = quad::gauss_legendre(8);
    const std::size_t d = static_cast<std::size_t>(space.base().dim());
    State x = space.normalize(q);
    double num = 0.0, den = 0.0, elapsed = 0.0;
    State p = x, img(d);
    constexpr int panels = 4;
    while (elapsed < orbit_length) {
        const double s0 = x[d];
        const double s1 = std::min(1.0, s0 + (orbit_length - elapsed));
        const double h = (s1 - s0) / panels;
        for (int k = 0; k < panels; ++k) {
            const double lo = s0 + k * h, hi = lo + h;
            num += quad::integrate(rule, [&](double s) { p[d] = s; return g(p) * a(p); }, lo, hi);
            den += quad::integrate(rule, [&](double s) { p[d] = s; return a(p); }, lo, hi);
        }
        elapsed += s1 - s0;
        if (s1 < 1.0) break;
        space.base().apply(std::span<const double>(x.data(), d), img);
        std::copy(img.begin(), img.end(), x.begin());
        x[d] = 0.0;
        std::copy(x.begin(), x.begin() + static_cast<long>(d), p.begin());
    }
    if (!(den > 0.0)) throw InvalidInput("suspended_average: the weight a vanishes along the orbit");
    AverageResult r;
    r.value = num / den;
    r.weight = den;
    r.low_confidence = orbit_length < 100.0;
    return r;
}

double min_ball_frequency(const BaseMap& rotation, double eps, long orbit_length, int centres)
{
    if (rotation.variant() != BaseMap::Variant::circleRotation)
        throw InvalidInput("min_ball_frequency: base must be a circle rotation");
    if (!(eps > 0.0)) throw InvalidInput("min_ball_frequency: eps must be positive");
    if (orbit_length < 1 || centres < 1) throw InvalidInput("min_ball_frequency: need a positive orbit length");
    if (eps >= 0.5) return 1.0;
    std::vector<double> pts(static_cast<std::size_t>(orbit_length));
    for (long k = 0; k < orbit_length; ++k)
        pts[static_cast<std::size_t>(k)] = wrap01(std::fmod(static_cast<double>(k) * rotation.angle(), 1.0));
    std::sort(pts.begin(), pts.end());
    auto count_in = [&](double lo, double hi) {  // [lo, hi] within [0, 1)
        return static_cast<long>(std::upper_bound(pts.begin(), pts.end(), hi) -
                                 std::lower_bound(pts.begin(), pts.end(), lo));
    };
    double best = 1.0;
    for (int j = 0; j < centres; ++j) {
        const double c = static_cast<double>(j) / centres;
        const double lo = c - eps, hi = c + eps;
        long n = 0;
        if (lo < 0.0) n = count_in(0.0, hi) + count_in(lo + 1.0, 1.0);
        else if (hi >= 1.0) n = count_in(lo, 1.0) + count_in(0.0, hi - 1.0);
        else n = count_in(lo, hi);
        best = std::min(best, static_cast<double>(n) / static_cast<double>(orbit_length));
    }
    return best;
}

std::vector<double> estimate_beta_ladder(const BaseMap& rotation, int i0, int n, long orbit_length)
{
    if (i0 < 3) throw InvalidInput("estimate_beta_ladder: i0 must be at least 3");
    if (n < 1) throw InvalidInput("estimate_beta_ladder: need at least one term");
    std::vector<double> betas;
    for (int i = 1; i <= n; ++i) {
        const double j = i0 + i;
        const double delta = min_ball_frequency(rotation, 1.0 / j, orbit_length);
        betas.push_back(1.0 / (2.0 * j) / j * delta);
    }
    return betas;
}

namespace {

sim::OrbitSamples make_samples(const SuspendedFlow& flow, const std::vector<State>& seeds, double t)
{
    if (!(t >= 1.0)) throw InvalidInput("separated sets: t must be at least 1");
    if (seeds.empty()) throw InvalidInput("separated sets: no seeds");
    sim::OrbitSamples s;
    s.seeds = seeds.size();
    s.times = static_cast<std::size_t>(std::floor(t)) + 1;
    s.dim = static_cast<std::size_t>(flow.space().dim());
    s.data.assign(s.seeds * s.times * s.dim, 0.0);
    return s;
}

void sample_one(const SuspendedFlow& flow, const State& seed, const sim::IntegratorOptions& opt,
                sim::OrbitSamples& out, std::size_t idx)
{
    State x = flow.space().normalize(seed);
    for (std::size_t k = 0; k < out.times; ++k) {
        if (k > 0) x = flow.advance(x, 1.0, opt).q;
        std::copy(x.begin(), x.begin() + static_cast<long>(out.dim), out.at(idx, k).begin());
    }
}

}  // namespace

sim::OrbitSamples sample_orbits(const SuspendedFlow& flow, const std::vector<State>& seeds, double t,
                                const sim::IntegratorOptions& opt)
{
    sim::OrbitSamples s = make_samples(flow, seeds, t);
    const long n = static_cast<long>(seeds.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i) sample_one(flow, seeds[static_cast<std::size_t>(i)], opt, s, static_cast<std::size_t>(i));
    return s;
}

sim::OrbitSamples sample_orbits_serial(const SuspendedFlow& flow, const std::vector<State>& seeds, double t,
                                       const sim::IntegratorOptions& opt)
{
    sim::OrbitSamples s = make_samples(flow, seeds, t);
    for (std::size_t i = 0; i < seeds.size(); ++i) sample_one(flow, seeds[i], opt, s, i);
    return s;
}

AbramovResult abramov_check(const BaseMap& base, double roof, const AbramovParams& p)
{
    if (!(roof >= 0.25 && roof <= 4.0)) throw InvalidInput("abramov_check: roof must lie in [1/4, 4]");
    if (base.variant() != BaseMap::Variant::torusAutomorphism && base.variant() != BaseMap::Variant::identity)
        throw InvalidInput("abramov_check: base must be a torus automorphism or the identity");
    if (base.dim() != 2) throw InvalidInput("abramov_check: base must be two-dimensional");
    if (p.seeds < 1 || p.eps.empty()) throw InvalidInput("abramov_check: need seeds and an eps grid");

    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const State anchor{unit(rng), unit(rng)};
    const State u = base.unstable_direction();

    const SuspensionSpace space(base);
    const SuspendedFlow flow = reparam(space, 1.0 / roof);
    const sim::Metric flow_metric = [&space](std::span<const double> a, std::span<const double> b) {
        return space.distance(a, b);
    };
    const std::size_t iterates = static_cast<std::size_t>(std::floor(p.t));

    AbramovResult res;
    res.roof = roof;
    res.h_reference = base.log_spectral_radius();
    std::size_t flow_best = 0, base_best = 0;
    for (std::size_t e = 0; e < p.eps.size(); ++e) {
        const double eps = p.eps[e];
        std::vector<State> seeds(p.seeds);
        for (std::size_t k = 0; k < p.seeds; ++k) {
            const double off = eps * static_cast<double>(k) / static_cast<double>(p.seeds);
            seeds[k] = {wrap01(anchor[0] + off * u[0]), wrap01(anchor[1] + off * u[1]), 0.0};
        }
        const sim::OrbitSamples fs = sample_orbits(flow, seeds, p.t);
        res.flow_estimates.push_back(sim::separated_entropy(fs, p.t, eps, flow_metric));

        sim::OrbitSamples bs;
        bs.seeds = p.seeds;
        bs.times = iterates + 1;
        bs.dim = 2;
        bs.data.resize(bs.seeds * bs.times * 2);
        for (std::size_t k = 0; k < p.seeds; ++k) {
            State y{seeds[k][0], seeds[k][1]};
            for (std::size_t j = 0; j <= iterates; ++j) {
                if (j > 0) y = base.apply(y);
                std::copy(y.begin(), y.end(), bs.at(k, j).begin());
            }
        }
        res.base_estimates.push_back(sim::separated_entropy(bs, p.t, eps, torus_distance));

        if (res.flow_estimates.back().h_estimate > res.flow_estimates[flow_best].h_estimate) flow_best = e;
        if (res.base_estimates.back().h_estimate > res.base_estimates[base_best].h_estimate) base_best = e;
    }
    res.h_flow = res.flow_estimates[flow_best].h_estimate;
    res.h_base = res.base_estimates[base_best].h_estimate;
    res.ratio = res.h_base > 0.0 ? res.h_flow * roof / res.h_base : std::numeric_limits<double>::quiet_NaN();
    res.low_confidence = res.flow_estimates[flow_best].cardinality == p.seeds ||
                         res.base_estimates[base_best].cardinality == p.seeds;
    return res;
}

}  // namespace eqflow::susp
