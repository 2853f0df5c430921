#include "eqflow/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace eqflow::sim {

FlowField::FlowField(int dim, Rule rule, Bounds inside, std::string name)
    : dim_(dim), rule_(std::move(rule)), inside_(std::move(inside)), name_(std::move(name))
{
    if (dim < 1) throw InvalidInput("flow field: dimension must be positive");
}

FlowField FlowField::zero(int dim)
{
    return FlowField(
        dim, [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); }, {},
        "zero");
}

FlowField::Bounds FlowField::box(double half_width)
{
    return [half_width](std::span<const double> x) {
        for (double v : x)
            if (!(std::abs(v) <= half_width)) return false;
        return true;
    };
}

FlowField::Bounds FlowField::ball(double radius)
{
    return [radius](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s <= radius * radius;
    };
}

State FlowField::eval(const State& x) const
{
    State out(x.size());
    rule_(x, out);
    return out;
}

std::string stop_name(StopReason r)
{
    switch (r) {
    case StopReason::completed: return "completed";
    case StopReason::exited: return "exited";
    case StopReason::stiff: return "stiff";
    case StopReason::stagnated: return "stagnated";
    case StopReason::max_steps: return "max_steps";
    case StopReason::event: return "event";
    case StopReason::observer: return "observer";
    }
    return "?";
}

void check_tol(double tol)
{
    if (!(tol >= 1e-12 && tol <= 1e-4)) throw InvalidInput("integrator: tol must lie in [1e-12, 1e-4]");
}

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Work {
    State k2, k3, k4, k5, k6, k7, tmp, err;
    explicit Work(std::size_t n) : k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), err(n) {}
};

// One step from (x, f0); writes the new state to xn and f(xn) to w.k7.
void dp_step(const FlowField& f, const State& x, const State& f0, double h, State& xn, Work& w, bool want_err)
{
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) w.tmp[i] = x[i] + h * a21 * f0[i];
    f.eval(w.tmp, w.k2);
    for (std::size_t i = 0; i < n; ++i) w.tmp[i] = x[i] + h * (a31 * f0[i] + a32 * w.k2[i]);
    f.eval(w.tmp, w.k3);
    for (std::size_t i = 0; i < n; ++i) w.tmp[i] = x[i] + h * (a41 * f0[i] + a42 * w.k2[i] + a43 * w.k3[i]);
    f.eval(w.tmp, w.k4);
    for (std::size_t i = 0; i < n; ++i)
        w.tmp[i] = x[i] + h * (a51 * f0[i] + a52 * w.k2[i] + a53 * w.k3[i] + a54 * w.k4[i]);
    f.eval(w.tmp, w.k5);
    for (std::size_t i = 0; i < n; ++i)
        w.tmp[i] = x[i] + h * (a61 * f0[i] + a62 * w.k2[i] + a63 * w.k3[i] + a64 * w.k4[i] + a65 * w.k5[i]);
    f.eval(w.tmp, w.k6);
    for (std::size_t i = 0; i < n; ++i)
        xn[i] = x[i] + h * (a71 * f0[i] + a73 * w.k3[i] + a74 * w.k4[i] + a75 * w.k5[i] + a76 * w.k6[i]);
    f.eval(xn, w.k7);
    if (want_err)
        for (std::size_t i = 0; i < n; ++i)
            w.err[i] = h * (e1 * f0[i] + e3 * w.k3[i] + e4 * w.k4[i] + e5 * w.k5[i] + e6 * w.k6[i] + e7 * w.k7[i]);
}

double scaled_norm(const State& v, const State& x, const State& xn, double tol)
{
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double sk = tol + tol * std::max(std::abs(x[i]), std::abs(xn[i]));
        const double q = v[i] / sk;
        s += q * q;
    }
    return std::sqrt(s / static_cast<double>(v.size()));
}

double initial_step(const FlowField& f, const State& x, const State& f0, double tol, double h_max)
{
    const std::size_t n = x.size();
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sk = tol + tol * std::abs(x[i]);
        d0 += (x[i] / sk) * (x[i] / sk);
        d1 += (f0[i] / sk) * (f0[i] / sk);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    double h0 = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, h_max);
    State x1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i) x1[i] = x[i] + h0 * f0[i];
    f.eval(x1, f1);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sk = tol + tol * std::abs(x[i]);
        const double q = (f1[i] - f0[i]) / sk;
        d2 += q * q;
    }
    d2 = std::sqrt(d2 / n) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, h_max});
}

double speed(const State& v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

State Segment::hermite(double t) const
{
    const double h = t1 - t0;
    State out(x0.size());
    if (h <= 0.0) return x0;
    const double s = (t - t0) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1[i];
    return out;
}

State Segment::exact(double t) const
{
    if (t <= t0) return x0;
    if (t >= t1) return x1;
    Work w(x0.size());
    State xn(x0.size());
    dp_step(*field, x0, f0, t - t0, xn, w, false);
    return xn;
}

double locate_root(const Segment& s, const std::function<double(std::span<const double>)>& g, double g0, double g1)
{
    double a = s.t0, b = s.t1, ga = g0, gb = g1;
    int side = 0;
    for (int it = 0; it < 100; ++it) {
        if (b - a <= 1e-14 * std::max(1.0, std::abs(b))) break;
        double c = (ga * b - gb * a) / (ga - gb);
        if (!(c > a && c < b)) c = 0.5 * (a + b);
        const State xc = s.exact(c);
        const double gc = g(xc);
        if (gc == 0.0) return c;
        if ((gc < 0) == (ga < 0)) {
            a = c;
            ga = gc;
            if (side == -1) gb *= 0.5;
            side = -1;
        } else {
            b = c;
            gb = gc;
            if (side == 1) ga *= 0.5;
            side = 1;
        }
    }
    return b;
}

RunResult advance(const FlowField& f, State x, double t0, double t1, const IntegratorOptions& opt,
                  const Observer& observer, std::span<const double> stops, const Event* terminal)
{
    if (static_cast<int>(x.size()) != f.dim()) throw InvalidInput("integrator: state dimension mismatch");
    if (!(t1 >= t0)) throw InvalidInput("integrator: end time precedes start time");
    if (!f.inside(x)) throw InvalidInput("integrator: initial point lies outside the chart");

    RunResult res;
    const std::size_t n = x.size();
    Work w(n);
    State fx = f.eval(x);
    State xn(n);
    double t = t0;
    std::size_t next_stop = 0;
    while (next_stop < stops.size() && stops[next_stop] <= t0) ++next_stop;

    auto finish = [&](StopReason r) {
        res.stop = r;
        res.t = t;
        res.x = x;
        return res;
    };

    if (opt.stagnation_speed > 0.0 && speed(fx) < opt.stagnation_speed) return finish(StopReason::stagnated);
    if (t1 == t0) return finish(StopReason::completed);

    double h = initial_step(f, x, fx, opt.tol, std::min(opt.max_step, t1 - t0));
    double err_old = 1e-4;
    bool last_rejected = false;
    long steps = 0;
    double g_prev = terminal ? terminal->g(x) : 0.0;

    while (t < t1) {
        if (++steps > opt.max_steps) return finish(StopReason::max_steps);
        const double h_req = h;
        double target = t1;
        if (next_stop < stops.size()) target = std::min(target, stops[next_stop]);
        bool hits_target = false;
        if (t + h >= target || target - (t + h) < 1e-12 * h) {
            h = target - t;
            hits_target = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t))) return finish(StopReason::stiff);

        dp_step(f, x, fx, h, xn, w, true);
        const double err = scaled_norm(w.err, x, xn, opt.tol);
        if (!std::isfinite(err) || err > 1.0) {
            ++res.stats.rejected;
            const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h *= std::min(1.0, fac);
            last_rejected = true;
            continue;
        }

        Segment seg{&f, t, hits_target ? target : t + h, x, xn, fx, w.k7};
        ++res.stats.accepted;
        res.stats.max_error = std::max(res.stats.max_error, err);

        if (!f.inside(xn)) {
            double a = seg.t0, b = seg.t1;
            for (int it = 0; it < 60 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
                const double m = 0.5 * (a + b);
                if (f.inside(seg.exact(m))) a = m;
                else b = m;
            }
            seg.x1 = seg.exact(a);
            seg.t1 = a;
            seg.f1 = f.eval(seg.x1);
            if (observer) observer(seg);
            t = a;
            x = seg.x1;
            return finish(StopReason::exited);
        }

        if (terminal) {
            const double g_new = terminal->g(xn);
            const bool fired = terminal->direction >= 0 ? (g_prev < 0.0 && g_new >= 0.0) : (g_prev > 0.0 && g_new <= 0.0);
            if (fired) {
                const double tr = g_new == 0.0 ? seg.t1 : locate_root(seg, terminal->g, g_prev, g_new);
                seg.x1 = seg.exact(tr);
                seg.t1 = tr;
                seg.f1 = f.eval(seg.x1);
                if (observer) observer(seg);
                t = tr;
                x = seg.x1;
                return finish(StopReason::event);
            }
            g_prev = g_new;
        }

        if (observer && !observer(seg)) {
            t = seg.t1;
            x = xn;
            return finish(StopReason::observer);
        }

        t = seg.t1;
        std::swap(x, xn);
        fx = w.k7;
        if (hits_target && next_stop < stops.size() && target == stops[next_stop]) ++next_stop;

        if (opt.stagnation_speed > 0.0 && speed(fx) < opt.stagnation_speed) return finish(StopReason::stagnated);

        // PI controller (Hairer's DOPRI5 constants)
        constexpr double beta = 0.04, expo1 = 0.2 - beta * 0.75;
        double fac = std::pow(std::max(err, 1e-10), expo1) / std::pow(err_old, beta);
        fac = std::clamp(fac / 0.9, 0.1, 5.0);
        double h_new = h / fac;
        if (last_rejected) h_new = std::min(h_new, h);
        if (hits_target) h_new = std::max(h_new, std::min(h_req, 5.0 * h));
        h = std::min(h_new, opt.max_step);
        err_old = std::max(err, 1e-4);
        last_rejected = false;
    }
    return finish(StopReason::completed);
}

State Trajectory::at(double t) const
{
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
    Segment s{field, times[k], times[k + 1], states[k], states[k + 1], derivs[k], derivs[k + 1]};
    return s.hermite(t);
}

Trajectory integrate(const FlowField& f, const State& x0, double t, double tol)
{
    IntegratorOptions opt;
    opt.tol = tol;
    return integrate(f, x0, t, opt);
}

Trajectory integrate(const FlowField& f, const State& x0, double t, const IntegratorOptions& opt)
{
    check_tol(opt.tol);
    Trajectory tr;
    tr.field = &f;
    tr.times.push_back(0.0);
    tr.states.push_back(x0);
    tr.derivs.push_back(f.eval(x0));
    const RunResult r = advance(f, x0, 0.0, t, opt, [&](const Segment& s) {
        tr.times.push_back(s.t1);
        tr.states.push_back(s.x1);
        tr.derivs.push_back(s.f1);
        return true;
    });
    tr.stats = r.stats;
    tr.stop = r.stop;
    return tr;
}

std::vector<State> sample(const FlowField& f, const State& x0, std::span<const double> times,
                          const IntegratorOptions& opt, StopReason* reason)
{
    std::vector<State> out;
    if (times.empty()) return out;
    std::size_t k = 0;
    while (k < times.size() && times[k] <= 0.0) {
        out.push_back(x0);
        ++k;
    }
    if (k == times.size()) return out;
    const RunResult r = advance(
        f, x0, 0.0, times.back(), opt,
        [&](const Segment& s) {
            while (k < times.size() && times[k] == s.t1) {
                out.push_back(s.x1);
                ++k;
            }
            return true;
        },
        times.subspan(k));
    if (reason) *reason = r.stop;
    return out;
}

std::string trajectory_csv(const Trajectory& tr)
{
    std::string out = "t";
    const std::size_t d = tr.states.empty() ? 0 : tr.states.front().size();
    for (std::size_t i = 1; i <= d; ++i) out += ",x" + std::to_string(i);
    out += '\n';
    char buf[64];
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", tr.times[k]);
        out += buf;
        for (double v : tr.states[k]) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace eqflow::sim
