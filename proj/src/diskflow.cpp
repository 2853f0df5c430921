#include "eqflow/diskflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

namespace eqflow::disk {

namespace {

constexpr double kPeriodSlack = 1e-12;

double ulp(double x)
{
    return std::nextafter(x, std::numeric_limits<double>::infinity()) - x;
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double log_big(const BigInt& n)
{
    if (n <= 0) return -std::numeric_limits<double>::infinity();
    const unsigned msb = boost::multiprecision::msb(n);
    if (msb < 62) return std::log(static_cast<double>(n.convert_to<unsigned long long>()));
    const unsigned shift = msb - 60;
    const BigInt top = n >> shift;
    return std::log(static_cast<double>(top.convert_to<unsigned long long>())) + shift * std::numbers::ln2;
}

double Strip::max_offset() const
{
    return std::ldexp(l, -3 * (1 << index));
}

RadiiLadder RadiiLadder::build(int i_max)
{
    if (i_max < 2 || i_max > kMaxIndex)
        throw InvalidInput("build_ladder: iMax must lie in [2, " + std::to_string(kMaxIndex) + "], got " +
                           std::to_string(i_max));
    RadiiLadder lad;
    lad.i_max_ = i_max;
    auto a = [](int i) { return 1.0 / static_cast<double>(i); };
    for (int i = 2; i <= i_max; ++i) {
        Strip s;
        s.index = i;
        s.center = a(i);
        s.l = std::min(a(i) - a(i + 1), a(i - 1) - a(i));
        s.step_exp = -(1 << (i + 2));
        s.step = std::ldexp(s.l, s.step_exp);
        s.log2_step = std::log2(s.l) + s.step_exp;
        s.half_count = BigInt(1) << (1 << i);
        s.count = 2 * s.half_count + 1;
        s.resolvable = s.step >= 4.0 * ulp(s.center + s.max_offset());
        lad.strips_.push_back(std::move(s));
    }
    return lad;
}

const Strip& RadiiLadder::strip(int i) const
{
    if (i < 2 || i > i_max_) throw InvalidInput("ladder: no strip with index " + std::to_string(i));
    return strips_[static_cast<std::size_t>(i - 2)];
}

BigInt RadiiLadder::merged_size() const
{
    BigInt n = 1;
    for (const auto& s : strips_) n += s.count;
    return n;
}

BigInt RadiiLadder::cumulative(int i) const
{
    BigInt n = 0;
    for (const auto& s : strips_)
        if (s.index <= i) n += s.count;
    return n;
}

double RadiiLadder::radius(const GridPoint& g) const
{
    if (g.strip == 0) return 1.0;
    const Strip& s = strip(g.strip);
    return s.center + static_cast<double>(g.j) * s.step;
}

std::vector<GridPoint> RadiiLadder::materialize_merged(std::size_t cap) const
{
    if (merged_size() > cap)
        throw InvalidInput("ladder: merged sequence too large to materialize (iMax = " + std::to_string(i_max_) + ")");
    std::vector<GridPoint> out;
    out.push_back(GridPoint{0, 0});
    for (const auto& s : strips_) {
        const long long J = s.half_count.convert_to<long long>();
        for (long long j = J; j >= -J; --j) out.push_back(GridPoint{s.index, j});
    }
    return out;
}

std::optional<GridPoint> RadiiLadder::locate(double r) const
{
    if (r == 1.0) return GridPoint{0, 0};
    for (const auto& s : strips_) {
        const double reach = s.max_offset() * (1.0 + 1e-12) + 2.0 * ulp(s.center);
        if (std::abs(r - s.center) > reach) continue;
        if (!s.resolvable) return GridPoint{s.index, 0};
        const double jj = std::round((r - s.center) / s.step);
        const long long J = s.half_count.convert_to<long long>();
        if (std::abs(jj) > static_cast<double>(J)) return std::nullopt;
        GridPoint g{s.index, static_cast<long long>(jj)};
        if (radius(g) == r) return g;
        return std::nullopt;
    }
    return std::nullopt;
}

bump::AlphaKnots RadiiLadder::alpha_knots() const
{
    bump::AlphaKnots k;
    k.knots.push_back(0.0);
    auto push = [&](double x, bool dense_before) {
        if (x <= k.knots.back()) return;
        k.dense_gap.push_back(dense_before);
        k.knots.push_back(x);
    };
    for (auto it = strips_.rbegin(); it != strips_.rend(); ++it) {
        const Strip& s = *it;
        if (s.resolvable) {
            const long long J = s.half_count.convert_to<long long>();
            for (long long j = -J; j <= J; ++j) {
                const double r = radius(GridPoint{s.index, j});
                push(r * r, false);
            }
        } else {
            const double lo = s.center - s.max_offset(), hi = s.center + s.max_offset();
            push(lo * lo, false);
            push(hi * hi, true);
        }
    }
    push(1.0, false);
    return k;
}

std::string variant_name(Variant v)
{
    switch (v) {
    case Variant::Z0: return "Z0";
    case Variant::Z1: return "Z1";
    case Variant::Z2: return "Z2";
    }
    return "?";
}

Variant parse_variant(const std::string& s)
{
    if (s == "Z0" || s == "z0") return Variant::Z0;
    if (s == "Z1" || s == "z1") return Variant::Z1;
    if (s == "Z2" || s == "z2") return Variant::Z2;
    throw InvalidInput("unknown disk flow '" + s + "' (expected Z0, Z1 or Z2)");
}

DiskField::DiskField(Variant v, RadiiLadder ladder)
    : variant_(v), ladder_(std::move(ladder)), knots_(ladder_.alpha_knots())
{
}

double DiskField::log_strip_speed(int i) const
{
    switch (variant_) {
    case Variant::Z0: return 0.0;
    case Variant::Z1: return 2.0 * std::log(ladder_.strip(i).center);
    case Variant::Z2: return -std::ldexp(1.0, i) * std::numbers::ln2;
    }
    return 0.0;
}

double DiskField::speed(double r) const
{
    if (variant_ == Variant::Z0) return 1.0;
    for (const auto& s : ladder_.strips()) {
        const double margin = s.l / 8.0;
        if (r < s.lo() - margin || r > s.hi() + margin) continue;
        const double inside = variant_ == Variant::Z1 ? s.center * s.center : std::ldexp(1.0, -(1 << s.index));
        double blend = 0.0;
        if (r > s.hi()) blend = smooth_step((r - s.hi()) / margin);
        else if (r < s.lo()) blend = smooth_step((s.lo() - r) / margin);
        return (1.0 - blend) * inside + blend;
    }
    return 1.0;
}

std::array<double, 2> DiskField::eval_extended(double x, double y) const
{
    const double r2 = x * x + y * y;
    const double a = r2 >= 1.0 ? 0.0 : alpha(r2);
    const double sp = speed(std::sqrt(r2));
    return {sp * (-y + a * x), sp * (x + a * y)};
}

std::array<double, 2> DiskField::eval(double x, double y) const
{
    if (!(x * x + y * y <= 1.0)) throw InvalidInput("field_eval: point lies outside the unit disk");
    return eval_extended(x, y);
}

sim::FlowField flow_field(const DiskField& f)
{
    auto shared = std::make_shared<const DiskField>(f);
    return sim::FlowField(
        2,
        [shared](std::span<const double> x, std::span<double> out) {
            const auto v = shared->eval_extended(x[0], x[1]);
            out[0] = v[0];
            out[1] = v[1];
        },
        sim::FlowField::ball(1.0 + 1e-12), variant_name(f.variant()));
}

PeriodicOrbitRecord orbit_period(const DiskField& f, double radius)
{
    const auto g = f.ladder().locate(radius);
    if (!g) throw InvalidInput("orbit_period: radius is not a ladder circle");
    PeriodicOrbitRecord rec;
    rec.radius = radius;
    rec.strip = g->strip;
    const double log_speed = g->strip == 0 ? 0.0 : f.log_strip_speed(g->strip);
    rec.minimal_period = LogReal{std::log(kTwoPi) - log_speed};
    return rec;
}

namespace {

struct Tally {
    BigInt interior;
    bool boundary = false;
};

Tally tally(const DiskField& f, double log_t)
{
    Tally out;
    const double log_2pi = std::log(kTwoPi);
    const double limit = log_t + kPeriodSlack;
    for (const auto& s : f.ladder().strips())
        if (log_2pi - f.log_strip_speed(s.index) <= limit) out.interior += s.count;
    out.boundary = log_2pi <= limit;
    return out;
}

}  // namespace

CensusRow census(const DiskField& f, LogReal t, CensusOptions opt)
{
    const Tally tl = tally(f, t.log_value);
    CensusRow row;
    row.log_t = t.log_value;
    row.t = std::exp(t.log_value);
    row.count = tl.interior;
    if (opt.include_boundary && tl.boundary) row.count += 1;
    if (opt.include_fixed_point) row.count += 1;
    row.log_count = log_big(row.count);
    row.ep_estimate = row.log_count > 0.0 ? std::exp(std::log(row.log_count) - row.log_t) : 0.0;
    return row;
}

CensusTable ep_curve_serial(const DiskField& f, std::span<const LogReal> ts, CensusOptions opt)
{
    CensusTable tab;
    tab.includes_fixed_point = opt.include_fixed_point;
    tab.includes_boundary = opt.include_boundary;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        if (k > 0 && !(ts[k].log_value > ts[k - 1].log_value))
            throw InvalidInput("ep_curve: times must be strictly increasing");
        tab.rows.push_back(census(f, ts[k], opt));
    }
    return tab;
}

CensusTable ep_curve(const DiskField& f, std::span<const LogReal> ts, CensusOptions opt)
{
    for (std::size_t k = 1; k < ts.size(); ++k)
        if (!(ts[k].log_value > ts[k - 1].log_value)) throw InvalidInput("ep_curve: times must be strictly increasing");
    CensusTable tab;
    tab.includes_fixed_point = opt.include_fixed_point;
    tab.includes_boundary = opt.include_boundary;
    tab.rows.resize(ts.size());
    const long n = static_cast<long>(ts.size());
#pragma omp parallel for schedule(static)
    for (long k = 0; k < n; ++k) tab.rows[static_cast<std::size_t>(k)] = census(f, ts[static_cast<std::size_t>(k)], opt);
    return tab;
}

LogReal canonical_time(Variant v, int n)
{
    switch (v) {
    case Variant::Z0: return LogReal{std::log(kTwoPi * n)};
    case Variant::Z1: return LogReal{std::log(kTwoPi) + 2.0 * std::log(static_cast<double>(n))};
    case Variant::Z2: return LogReal{std::log(kTwoPi) + std::ldexp(1.0, n) * std::numbers::ln2};
    }
    return {};
}

BigInt sphere_census(const DiskField& f, LogReal t)
{
    const Tally tl = tally(f, t.log_value);
    BigInt n = 2 * tl.interior + 2;
    if (tl.boundary) n += 1;
    return n;
}

std::array<double, 3> sphere_lift(double x, double y, int hemisphere)
{
    const double z = std::sqrt(std::max(0.0, 1.0 - x * x - y * y));
    return {x, y, hemisphere >= 0 ? z : -z};
}

std::array<double, 3> sphere_field(const DiskField& f, std::span<const double> p)
{
    if (p.size() != 3) throw InvalidInput("sphere_field: expected a point in R^3");
    const auto v = f.eval_extended(p[0], p[1]);
    const double z = p[2];
    const double vz = std::abs(z) > 1e-12 ? -(p[0] * v[0] + p[1] * v[1]) / z : 0.0;
    return {v[0], v[1], vz};
}

std::string census_csv_header()
{
    return "t,log_t,count,log_count,ep_estimate";
}

std::string census_csv_row(const CensusRow& r)
{
    return fmt(r.t) + "," + fmt(r.log_t) + "," + r.count.str() + "," + fmt(r.log_count) + "," + fmt(r.ep_estimate);
}

}  // namespace eqflow::disk
