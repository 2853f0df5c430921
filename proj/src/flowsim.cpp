#include "eqflow/flowsim.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace eqflow::sim {

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Boundary time of `region` on [a, b] given differing membership at the ends.
double bisect_region(const Segment& seg, const Region& region, double a, double b, bool in_a)
{
    for (int it = 0; it < 60 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
        const double m = 0.5 * (a + b);
        if (region(seg.exact(m)) == in_a) a = m;
        else b = m;
    }
    return 0.5 * (a + b);
}

double reciprocal_ratio(const Segment& seg, const Ratio& ratio, double a, double b)
{
    // 3-point Gauss on the Hermite interpolant
    static const double nodes[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += weights[k] / ratio(seg.hermite(mid + half * nodes[k]));
    return s * half;
}

}  // namespace

PeriodResult detect_period(const FlowField& f, const State& x0, double guess, double tol)
{
    if (!(guess > 0.0)) throw InvalidInput("detect_period: guess must be positive");
    if (!(tol > 0.0)) throw InvalidInput("detect_period: tol must be positive");
    PeriodResult res;
    const State f0 = f.eval(x0);
    const double sp = norm2(f0);
    if (sp < 1e-300) {
        res.found = true;
        res.fixed_point = true;
        return res;
    }
    State n(f0.size());
    for (std::size_t i = 0; i < n.size(); ++i) n[i] = f0[i] / sp;
    auto g = [&](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += n[i] * (x[i] - x0[i]);
        return s;
    };

    IntegratorOptions opt;
    opt.tol = std::clamp(tol * 1e-3, 1e-12, 1e-4);
    double best_t = -1.0;
    State best_x;
    advance(f, x0, 0.0, 2.0 * guess, opt, [&](const Segment& seg) {
        const double ga = g(seg.x0), gb = g(seg.x1);
        if (ga < 0.0 && gb >= 0.0) {
            const double tc = gb == 0.0 ? seg.t1 : locate_root(seg, g, ga, gb);
            if (best_t < 0.0 || std::abs(tc - guess) < std::abs(best_t - guess)) {
                best_t = tc;
                best_x = seg.exact(tc);
            }
        }
        return true;
    });
    if (best_t < 0.0) return res;
    res.closure = dist2(best_x, x0);
    res.period = best_t;
    res.found = res.closure <= tol * std::max(1.0, norm2(x0));
    return res;
}

double SectionSpec::value(std::span<const double> x) const
{
    return dot(normal, x) - offset;
}

SectionSpec SectionSpec::make(State normal, double offset, int orientation)
{
    const double n = norm2(normal);
    if (!(n > 0.0)) throw InvalidInput("section: normal must be nonzero");
    for (double& v : normal) v /= n;
    if (orientation != 1 && orientation != -1) throw InvalidInput("section: orientation must be +1 or -1");
    return SectionSpec{std::move(normal), offset / n, orientation};
}

ReturnResult first_return(const FlowField& f, const State& x0, const SectionSpec& s, double t_max,
                          const IntegratorOptions& opt)
{
    if (!(t_max > 0.0)) throw InvalidInput("first_return: tMax must be positive");
    if (s.normal.size() != x0.size()) throw InvalidInput("first_return: section dimension mismatch");
    ReturnResult res;
    if (norm2(f.eval(x0)) < std::max(opt.stagnation_speed, 1e-300)) {
        res.stagnated = true;
        return res;
    }
    auto g = [&](std::span<const double> x) { return s.orientation * s.value(x); };
    const RunResult run = advance(f, x0, 0.0, t_max, opt, [&](const Segment& seg) {
        const double ga = g(seg.x0), gb = g(seg.x1);
        if (ga < 0.0 && gb >= 0.0) {
            res.tau = gb == 0.0 ? seg.t1 : locate_root(seg, g, ga, gb);
            res.point = seg.exact(res.tau);
            res.found = true;
            return false;
        }
        return true;
    });
    if (!res.found && run.stop == StopReason::stagnated) res.stagnated = true;
    return res;
}

void accumulate_occupation(const Segment& seg, const Region& region, const Ratio& ratio, OccupancyResult& acc)
{
    constexpr int sub = 8;
    double u = seg.t0;
    bool in_u = region(seg.x0);
    for (int k = 1; k <= sub; ++k) {
        const double v = k == sub ? seg.t1 : seg.t0 + (seg.t1 - seg.t0) * k / sub;
        const bool in_v = region(k == sub ? seg.x1 : seg.hermite(v));
        double a = u, b = v;
        if (in_u != in_v) {
            const double c = bisect_region(seg, region, u, v, in_u);
            if (in_u) b = c;
            else a = c;
        }
        if (in_u || in_v) {
            acc.J += b - a;
            if (ratio) acc.lambda += reciprocal_ratio(seg, ratio, a, b);
        }
        u = v;
        in_u = in_v;
    }
}

OccupancyResult occupation(const FlowField& f, const State& x0, double t, const Region& region,
                           const IntegratorOptions& opt, const Ratio& ratio)
{
    if (!(t >= 0.0)) throw InvalidInput("occupation: t must be nonnegative");
    OccupancyResult res;
    res.has_lambda = static_cast<bool>(ratio);
    const RunResult run = advance(f, x0, 0.0, t, opt, [&](const Segment& seg) {
        accumulate_occupation(seg, region, ratio, res);
        return true;
    });
    res.t_total = run.t;
    res.J = std::min(res.J, res.t_total);
    if (ratio) res.lambda += res.t_total - res.J;
    return res;
}

namespace {

void sample_one(const FlowField& f, const State& seed, std::size_t k_max, const IntegratorOptions& opt,
                OrbitSamples& out, std::size_t idx)
{
    std::vector<double> times(k_max + 1);
    for (std::size_t k = 0; k <= k_max; ++k) times[k] = static_cast<double>(k);
    const std::vector<State> st = sample(f, seed, times, opt);
    for (std::size_t k = 0; k <= k_max; ++k) {
        const State& s = k < st.size() ? st[k] : st.back();
        std::copy(s.begin(), s.end(), out.at(idx, k).begin());
    }
}

OrbitSamples make_samples(const std::vector<State>& seeds, double t)
{
    if (!(t >= 1.0)) throw InvalidInput("separated sets: t must be at least 1");
    if (seeds.empty()) throw InvalidInput("separated sets: no seeds");
    OrbitSamples s;
    s.seeds = seeds.size();
    s.times = static_cast<std::size_t>(std::floor(t)) + 1;
    s.dim = seeds.front().size();
    s.data.assign(s.seeds * s.times * s.dim, 0.0);
    return s;
}

}  // namespace

OrbitSamples sample_orbits(const FlowField& f, const std::vector<State>& seeds, double t,
                           const IntegratorOptions& opt)
{
    OrbitSamples s = make_samples(seeds, t);
    const long n = static_cast<long>(seeds.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i)
        sample_one(f, seeds[static_cast<std::size_t>(i)], s.times - 1, opt, s, static_cast<std::size_t>(i));
    return s;
}

OrbitSamples sample_orbits_serial(const FlowField& f, const std::vector<State>& seeds, double t,
                                  const IntegratorOptions& opt)
{
    OrbitSamples s = make_samples(seeds, t);
    for (std::size_t i = 0; i < seeds.size(); ++i) sample_one(f, seeds[i], s.times - 1, opt, s, i);
    return s;
}

double euclidean(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

DistanceMatrix orbit_distances(const OrbitSamples& s, const Metric& m)
{
    DistanceMatrix d(s.seeds);
    const long n = static_cast<long>(s.seeds);
#pragma omp parallel for schedule(dynamic, 8)
    for (long j = 1; j < n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        for (std::size_t i = 0; i < uj; ++i) {
            double worst = 0.0;
            for (std::size_t k = 0; k < s.times; ++k) worst = std::max(worst, m(s.at(i, k), s.at(uj, k)));
            d.at(i, uj) = worst;
        }
    }
    return d;
}

std::size_t greedy_separated(const DistanceMatrix& d, double eps)
{
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < d.size(); ++i) {
        bool ok = true;
        for (std::size_t j : kept)
            if (d.at(i, j) < eps) {
                ok = false;
                break;
            }
        if (ok) kept.push_back(i);
    }
    return kept.size();
}

namespace {

SeparatedSetEstimate finish(std::size_t card, double t, double eps, std::size_t n)
{
    SeparatedSetEstimate e;
    e.t = t;
    e.epsilon = eps;
    e.cardinality = card;
    e.h_estimate = std::log(static_cast<double>(card)) / t;
    e.sample_size = n;
    return e;
}

}  // namespace

SeparatedSetEstimate separated_entropy(const OrbitSamples& s, double t, double eps, const Metric& m)
{
    if (!(eps > 0.0)) throw InvalidInput("separated sets: eps must be positive");
    return finish(greedy_separated(orbit_distances(s, m), eps), t, eps, s.seeds);
}

SeparatedSetEstimate separated_entropy_serial(const OrbitSamples& s, double t, double eps, const Metric& m)
{
    if (!(eps > 0.0)) throw InvalidInput("separated sets: eps must be positive");
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < s.seeds; ++i) {
        bool ok = true;
        for (std::size_t j : kept) {
            bool separated = false;
            for (std::size_t k = 0; k < s.times && !separated; ++k) separated = m(s.at(i, k), s.at(j, k)) >= eps;
            if (!separated) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(i);
    }
    return finish(kept.size(), t, eps, s.seeds);
}

std::vector<SeparatedSetEstimate> separated_entropy_grid(const OrbitSamples& s, double t,
                                                         std::span<const double> eps, const Metric& m)
{
    const DistanceMatrix d = orbit_distances(s, m);
    std::vector<SeparatedSetEstimate> out;
    for (double e : eps) {
        if (!(e > 0.0)) throw InvalidInput("separated sets: eps must be positive");
        out.push_back(finish(greedy_separated(d, e), t, e, s.seeds));
    }
    return out;
}

SeparatedSetEstimate separated_entropy(const FlowField& f, const std::vector<State>& seeds, double t, double eps,
                                       const Metric& m, const IntegratorOptions& opt)
{
    return separated_entropy(sample_orbits(f, seeds, t, opt), t, eps, m);
}

std::string estimate_jsonl(const SeparatedSetEstimate& e)
{
    nlohmann::ordered_json j;
    j["t"] = e.t;
    j["epsilon"] = e.epsilon;
    j["cardinality"] = e.cardinality;
    j["hEstimate"] = e.h_estimate;
    j["sampleSize"] = e.sample_size;
    return j.dump();
}

}  // namespace eqflow::sim
