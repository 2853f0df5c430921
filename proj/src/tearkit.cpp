#include "eqflow/tearkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <random>

#include "json.hpp"

namespace eqflow::tear {

std::string region_name(Region r)
{
    switch (r) {
    case Region::U1: return "U1";
    case Region::V1: return "V1";
    case Region::W1: return "W1";
    case Region::outside: return "outside";
    }
    return "?";
}

Classification classify(double x1, double x2)
{
    const double h = std::abs(x2);
    Classification c;
    if (!(std::abs(x1) < 2.0) || h > 2.0) {
        c.b = h;
        return c;
    }
    const double g = bump::gamma0(x1);
    if (h <= g) {
        c.region = Region::U1;
        c.a = g > 0.0 ? h / g : 0.0;
    } else if (h <= g + 1.0) {
        c.region = Region::V1;
        c.b = h - g;
    } else {
        c.region = Region::W1;
        c.b = (h - 2.0 * g) / (1.0 - g);
    }
    return c;
}

std::array<double, 2> delta(double x1, double x2)
{
    const Classification c = classify(x1, x2);
    const double sgn = x2 < 0.0 ? -1.0 : 1.0;
    switch (c.region) {
    case Region::U1: return {x1, 0.0};
    case Region::V1:
    case Region::W1: return {x1, sgn * c.b};
    case Region::outside: break;
    }
    return {x1, x2};
}

std::array<double, 2> straight_eval(double y1, double y2)
{
    return {bump::eta_profile(y1, std::abs(y2)), 0.0};
}

std::string variant_name(TearVariant v)
{
    return v == TearVariant::Z ? "Z" : "Z1";
}

std::array<double, 2> TearField::eval(double x1, double x2) const
{
    const Classification c = classify(x1, x2);
    const double sgn = x2 < 0.0 ? -1.0 : 1.0;
    const double h = std::abs(x2);
    double e = 0.0, slope = 0.0;
    switch (c.region) {
    case Region::U1:
        e = bump::eta_profile(x1, 0.0);
        slope = c.a * bump::gamma0_prime(x1);
        break;
    case Region::V1:
    case Region::W1:
        if (variant_ == TearVariant::Z) {
            e = bump::eta_profile(x1, c.b);
            slope = (c.region == Region::V1 ? 1.0 : 2.0 - c.b) * bump::gamma0_prime(x1);
        } else {
            const double v = bump::vhat0(x1, h);
            e = bump::eta_profile(x1, h - v * bump::gamma0(x1));
            slope = v * bump::gamma0_prime(x1);
        }
        break;
    case Region::outside: e = bump::eta_profile(x1, h); break;
    }
    return {e, sgn * e * slope};
}

sim::FlowField TearField::flow_field(double half_width) const
{
    const TearField self = *this;
    return sim::FlowField(
        2,
        [self](std::span<const double> x, std::span<double> out) {
            const auto z = self.eval(x[0], x[1]);
            out[0] = z[0];
            out[1] = z[1];
        },
        sim::FlowField::box(half_width), variant_name(variant_));
}

RotatedField::RotatedField(TearField planar, int dim) : planar_(planar), dim_(dim)
{
    if (dim < 3) throw InvalidInput("rotated field: dimension must be at least 3");
}

namespace {

double transverse(std::span<const double> x)
{
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += x[i] * x[i];
    return std::sqrt(s);
}

}  // namespace

void RotatedField::eval(std::span<const double> x, std::span<double> out) const
{
    const double rho = transverse(x);
    std::fill(out.begin(), out.end(), 0.0);
    if (rho == 0.0) {
        out[0] = planar_.eval(x[0], 0.0)[0];
        return;
    }
    const auto z = planar_.eval(x[0], rho);
    out[0] = z[0];
    for (std::size_t i = 1; i < x.size(); ++i) out[i] = z[1] * x[i] / rho;
}

State RotatedField::eval(const State& x) const
{
    if (static_cast<int>(x.size()) != dim_) throw InvalidInput("rotated field: point has wrong dimension");
    State out(x.size());
    eval(std::span<const double>(x), out);
    return out;
}

sim::FlowField RotatedField::flow_field(double radius) const
{
    const RotatedField self = *this;
    return sim::FlowField(
        dim_, [self](std::span<const double> x, std::span<double> out) { self.eval(x, out); },
        sim::FlowField::ball(radius), "rotated " + variant_name(planar_.variant()));
}

std::array<double, 2> pi_tilde(std::span<const double> x)
{
    return delta(x[0], transverse(x));
}

std::string grid_name(Grid g)
{
    switch (g) {
    case Grid::axis: return "axis";
    case Grid::sigmaHalf: return "sigmaHalf";
    case Grid::rhoHalf: return "rhoHalf";
    }
    return "?";
}

Grid parse_grid(const std::string& s)
{
    if (s == "axis") return Grid::axis;
    if (s == "sigmaHalf") return Grid::sigmaHalf;
    if (s == "rhoHalf") return Grid::rhoHalf;
    throw InvalidInput("unknown grid '" + s + "' (expected axis, sigmaHalf or rhoHalf)");
}

std::vector<std::array<double, 2>> grid_points(Grid g, int n)
{
    if (n < 2) throw InvalidInput("grid: need at least two points");
    std::vector<std::array<double, 2>> pts;
    for (int k = 0; k < n; ++k) {
        const double s = -2.5 + 5.0 * k / (n - 1);
        switch (g) {
        case Grid::axis: pts.push_back({s, 0.0}); break;
        case Grid::sigmaHalf: pts.push_back({s, 0.5 + bump::gamma0(s)}); break;
        case Grid::rhoHalf: {
            const double u = -1.0 + 2.0 * (k + 0.5) / n;
            pts.push_back({u, 0.5 * bump::gamma0(u)});
            break;
        }
        }
    }
    return pts;
}

namespace {

using Projection = std::function<std::array<double, 2>(std::span<const double>)>;

// Max deviation over the sample times, or NaN when either run ends early.
double residual_one(const sim::FlowField& f, const sim::FlowField& straight, const State& x0,
                    const Projection& proj, std::span<const double> times, const sim::IntegratorOptions& opt)
{
    const auto p0 = proj(x0);
    const std::vector<State> xs = sim::sample(f, x0, times, opt);
    const std::vector<State> ys = sim::sample(straight, State{p0[0], p0[1]}, times, opt);
    if (xs.size() < times.size() || ys.size() < times.size()) return std::numeric_limits<double>::quiet_NaN();
    double worst = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto p = proj(xs[k]);
        worst = std::max(worst, std::hypot(p[0] - ys[k][0], p[1] - ys[k][1]));
    }
    return worst;
}

ResidualReport residual_over(const sim::FlowField& f, const std::vector<State>& grid, const Projection& proj,
                             double t_max, double tol)
{
    if (!(t_max > 0.0)) throw InvalidInput("semiconjugacy: tMax must be positive");
    sim::check_tol(tol);
    sim::IntegratorOptions opt;
    opt.tol = tol;
    const sim::FlowField straight(
        2,
        [](std::span<const double> y, std::span<double> out) {
            const auto z = straight_eval(y[0], y[1]);
            out[0] = z[0];
            out[1] = z[1];
        },
        sim::FlowField::box(6.0), "straight");
    std::vector<double> times(100);
    for (std::size_t k = 0; k < times.size(); ++k) times[k] = t_max * static_cast<double>(k + 1) / 100.0;

    std::vector<double> per(grid.size());
    const long n = static_cast<long>(grid.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        per[u] = residual_one(f, straight, grid[u], proj, times, opt);
    }
    ResidualReport r;
    r.samples = grid.size();
    for (double v : per) {
        if (std::isnan(v)) ++r.excluded;
        else r.residual = std::max(r.residual, v);
    }
    return r;
}

}  // namespace

ResidualReport semiconjugacy_residual(const TearField& f, double t_max, std::span<const std::array<double, 2>> grid,
                                      double tol)
{
    std::vector<State> pts;
    for (const auto& p : grid) pts.push_back({p[0], p[1]});
    return residual_over(
        f.flow_field(6.0), pts, [](std::span<const double> x) { return delta(x[0], x[1]); }, t_max, tol);
}

ResidualReport semiconjugacy_residual(const RotatedField& f, double t_max, const std::vector<State>& grid,
                                      double tol)
{
    for (const State& p : grid)
        if (static_cast<int>(p.size()) != f.dim()) throw InvalidInput("semiconjugacy: grid point has wrong dimension");
    return residual_over(f.flow_field(6.0), grid, pi_tilde, t_max, tol);
}

std::vector<State> departure_samples(int dim, std::size_t n, double rho_min, double rho_max, std::uint64_t seed)
{
    if (dim < 3) throw InvalidInput("departure samples: dimension must be at least 3");
    if (!(rho_min > 0.0 && rho_min <= rho_max)) throw InvalidInput("departure samples: need 0 < rhoMin <= rhoMax");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<State> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double rho = rho_min + (rho_max - rho_min) * unit(rng);
        State x(static_cast<std::size_t>(dim), 0.0);
        double len = 0.0;
        while (len < 1e-6) {
            len = 0.0;
            for (int i = 1; i < dim; ++i) {
                x[static_cast<std::size_t>(i)] = gauss(rng);
                len += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
            }
            len = std::sqrt(len);
        }
        x[0] = -3.0;
        for (int i = 1; i < dim; ++i) x[static_cast<std::size_t>(i)] *= rho / len;
        out.push_back(std::move(x));
    }
    return out;
}

MirrorResult mirror_return(const RotatedField& f, const State& x0, double t_max, double tol)
{
    if (static_cast<int>(x0.size()) != f.dim()) throw InvalidInput("mirror return: point has wrong dimension");
    sim::check_tol(tol);
    sim::IntegratorOptions opt;
    opt.tol = tol;
    opt.stagnation_speed = 1e-12;
    State normal(x0.size(), 0.0);
    normal[0] = 1.0;
    const sim::SectionSpec arrival = sim::SectionSpec::make(normal, 3.0, +1);
    const sim::ReturnResult rr = sim::first_return(f.flow_field(6.0), x0, arrival, t_max, opt);
    MirrorResult m;
    m.found = rr.found;
    m.stagnated = rr.stagnated;
    if (!rr.found) return m;
    m.tau = rr.tau;
    m.arrival = rr.point;
    for (std::size_t i = 1; i < x0.size(); ++i)
        m.transverse_error = std::max(m.transverse_error, std::abs(rr.point[i] - x0[i]));
    return m;
}

MirrorReport mirror_check(const RotatedField& f, const std::vector<State>& samples, double tol)
{
    std::vector<MirrorResult> res(samples.size());
    const long n = static_cast<long>(samples.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i)
        res[static_cast<std::size_t>(i)] = mirror_return(f, samples[static_cast<std::size_t>(i)], 1e7, tol);
    MirrorReport r;
    for (const MirrorResult& m : res) {
        if (m.found) {
            ++r.valid;
            r.max_transverse_error = std::max(r.max_transverse_error, m.transverse_error);
        } else if (m.stagnated) {
            ++r.stagnated;
        } else {
            ++r.missing;
        }
    }
    return r;
}

RatioReport return_ratio(const RotatedField& a, const RotatedField& b, const std::vector<State>& samples, double tol)
{
    if (a.dim() != b.dim()) throw InvalidInput("return ratio: fields differ in dimension");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    RatioReport r;
    r.ratios.assign(samples.size(), nan);
    std::vector<char> stalled(samples.size(), 0);
    const long n = static_cast<long>(samples.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const MirrorResult ma = mirror_return(a, samples[u], 1e7, tol);
        const MirrorResult mb = mirror_return(b, samples[u], 1e7, tol);
        if (ma.stagnated || mb.stagnated) stalled[u] = 1;
        else if (ma.found && mb.found && ma.tau > 0.0) r.ratios[u] = mb.tau / ma.tau;
    }
    r.min_ratio = nan;
    r.max_ratio = nan;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (stalled[i]) ++r.stagnated;
        const double q = r.ratios[i];
        if (std::isnan(q)) continue;
        if (r.valid == 0) r.min_ratio = r.max_ratio = q;
        r.min_ratio = std::min(r.min_ratio, q);
        r.max_ratio = std::max(r.max_ratio, q);
        ++r.valid;
    }
    return r;
}

std::string residual_jsonl(const std::string& grid, const ResidualReport& r)
{
    nlohmann::ordered_json j;
    j["grid"] = grid;
    j["residual"] = r.residual;
    j["samples"] = r.samples;
    j["excluded"] = r.excluded;
    return j.dump();
}

std::string ratio_jsonl(const RatioReport& r)
{
    nlohmann::ordered_json j;
    j["minRatio"] = r.min_ratio;
    j["maxRatio"] = r.max_ratio;
    j["valid"] = r.valid;
    j["stagnated"] = r.stagnated;
    return j.dump();
}

std::string field_grid_csv(const TearField& f, double lo, double hi, int n)
{
    if (n < 2 || !(hi > lo)) throw InvalidInput("field grid: need n >= 2 and lo < hi");
    std::string out = "x1,x2,z1,z2\n";
    char buf[128];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x1 = lo + (hi - lo) * i / (n - 1), x2 = lo + (hi - lo) * j / (n - 1);
            const auto z = f.eval(x1, x2);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", x1, x2, z[0], z[1]);
            out += buf;
        }
    return out;
}

EmbeddedField::EmbeddedField(disk::Variant v, int i_max, int dim, Ambient ambient)
    : disk_(v, disk::RadiiLadder::build(i_max)),
      rotation_(disk::Variant::Z0, disk_.ladder()),
      dim_(dim),
      ambient_(std::move(ambient))
{
    if (dim < 3) throw InvalidInput("embedded field: dimension must be at least 3");
}

namespace {

double sq_norm(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

double tail_sq(std::span<const double> x)
{
    double s = 0.0;
    for (std::size_t i = 2; i < x.size(); ++i) s += x[i] * x[i];
    return s;
}

}  // namespace

double EmbeddedField::varsigma(std::span<const double> x) const
{
    const double rbar = std::hypot(x[0], x[1]);
    const double out = std::max(0.0, rbar - 1.0);
    const double cap = std::max(0.0, 2.0 - sq_norm(x));
    return (out * out * out + tail_sq(x)) * cap * cap * cap;
}

double EmbeddedField::chi(std::span<const double> x) const
{
    return 1.0 - smooth_step(sq_norm(x) - 1.0);
}

double EmbeddedField::beta_hat(std::span<const double> x) const
{
    const double c = chi(x);
    return c * disk_.speed(std::hypot(x[0], x[1])) + (1.0 - c);
}

void EmbeddedField::eval(std::span<const double> x, std::span<double> out) const
{
    if (sq_norm(x) >= 2.0) {
        if (ambient_) ambient_(x, out);
        else std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    const double c = chi(x);
    const auto f = disk_.eval_extended(x[0], x[1]);
    const auto g = rotation_.eval_extended(x[0], x[1]);
    // c * beta_hat * Z0, written so that on D1 it is the disk field verbatim
    for (int k = 0; k < 2; ++k) out[static_cast<std::size_t>(k)] = c * (c * f[k] + (1.0 - c) * g[k]);
    const double up = beta_hat(x) * varsigma(x);
    for (std::size_t i = 2; i < out.size(); ++i) out[i] = up;
}

State EmbeddedField::eval(const State& x) const
{
    if (static_cast<int>(x.size()) != dim_) throw InvalidInput("embedded field: point has wrong dimension");
    State out(x.size());
    eval(std::span<const double>(x), out);
    return out;
}

sim::FlowField EmbeddedField::flow_field(double radius) const
{
    auto self = std::make_shared<const EmbeddedField>(*this);
    return sim::FlowField(
        dim_, [self](std::span<const double> x, std::span<double> out) { self->eval(x, out); },
        sim::FlowField::ball(radius), disk::variant_name(disk_.variant()) + " embedded");
}

bool in_d1(std::span<const double> x)
{
    return tail_sq(x) == 0.0 && x[0] * x[0] + x[1] * x[1] <= 1.0;
}

bool in_d2(std::span<const double> x)
{
    return sq_norm(x) < 2.0;
}

}  // namespace eqflow::tear
