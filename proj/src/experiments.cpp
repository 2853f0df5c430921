#include "eqflow/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>

#include "eqflow/bumpkit.hpp"
#include "eqflow/diskflow.hpp"
#include "eqflow/flowsim.hpp"
#include "eqflow/suspension.hpp"
#include "eqflow/tearkit.hpp"

namespace eqflow::cli {

using nlohmann::ordered_json;

namespace {

int checked_int(const ResolvedConfig& c, const std::string& key, long long lo, long long hi)
{
    const long long v = c.get_int(key);
    if (v < lo || v > hi)
        throw InvalidInput("parameter '" + key + "' must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                           "], got " + std::to_string(v));
    return static_cast<int>(v);
}

disk::DiskField make_disk(const ResolvedConfig& c)
{
    return disk::DiskField(disk::parse_variant(c.get("flow")),
                           disk::RadiiLadder::build(checked_int(c, "imax", 2, disk::RadiiLadder::kMaxIndex)));
}

std::string big_text(const disk::BigInt& n)
{
    return n.str();
}

RunOutput census(const ResolvedConfig& c)
{
    const disk::DiskField f = make_disk(c);
    const int n_max = checked_int(c, "tmax-index", 2, 64);
    disk::CensusOptions opt;
    opt.include_fixed_point = c.get_bool("include-fixed-point");
    opt.include_boundary = c.get_bool("include-boundary");
    RunOutput out;
    out.columns = {{"n", "census index"},
                   {"t", "census time t_n"},
                   {"log_t", "natural log of t_n"},
                   {"count", "periodic orbits with minimal period at most t_n (exact)"},
                   {"log_count", "natural log of count"},
                   {"ep", "log(count) / t, the periodic-orbit growth-rate witness"}};
    for (int n = 2; n <= n_max; ++n) {
        const disk::LogReal t = disk::canonical_time(f.variant(), n);
        const disk::CensusRow row = disk::census(f, t, opt);
        out.records.push_back(ordered_json{{"n", n},
                                           {"t", t.value()},
                                           {"log_t", row.log_t},
                                           {"count", big_text(row.count)},
                                           {"log_count", row.log_count},
                                           {"ep", row.ep_estimate}});
    }
    return out;
}

RunOutput sphere_census(const ResolvedConfig& c)
{
    const disk::DiskField f = make_disk(c);
    const int n_max = checked_int(c, "tmax-index", 2, 64);
    RunOutput out;
    out.columns = {{"n", "census index"},
                   {"t", "census time t_n"},
                   {"log_t", "natural log of t_n"},
                   {"count", "periodic orbits on the sphere with minimal period at most t_n (exact)"},
                   {"log_count", "natural log of count"}};
    for (int n = 2; n <= n_max; ++n) {
        const disk::LogReal t = disk::canonical_time(f.variant(), n);
        const disk::BigInt count = disk::sphere_census(f, t);
        out.records.push_back(ordered_json{{"n", n},
                                           {"t", t.value()},
                                           {"log_t", t.log_value},
                                           {"count", big_text(count)},
                                           {"log_count", disk::log_big(count)}});
    }
    return out;
}

RunOutput ep_curve(const ResolvedConfig& c)
{
    const disk::DiskField f = make_disk(c);
    const int lo = checked_int(c, "n-min", 1, 64);
    const int hi = checked_int(c, "n-max", lo, 64);
    std::vector<disk::LogReal> ts;
    for (int n = lo; n <= hi; ++n) ts.push_back(disk::canonical_time(f.variant(), n));
    const disk::CensusTable table = disk::ep_curve(f, ts);
    RunOutput out;
    out.columns = {{"n", "census index"},
                   {"log_t", "natural log of t_n"},
                   {"log_count", "natural log of the orbit count"},
                   {"ep", "log(count) / t"}};
    for (std::size_t k = 0; k < table.rows.size(); ++k)
        out.records.push_back(ordered_json{{"n", lo + static_cast<int>(k)},
                                           {"log_t", table.rows[k].log_t},
                                           {"log_count", table.rows[k].log_count},
                                           {"ep", table.rows[k].ep_estimate}});
    return out;
}

RunOutput orbit_verify(const ResolvedConfig& c)
{
    const disk::DiskField f = make_disk(c);
    const double radius = c.get_double("radius");
    const double tol = c.get_double("tol");
    sim::check_tol(tol);
    const disk::PeriodicOrbitRecord rec = disk::orbit_period(f, radius);
    const double period = rec.minimal_period.value();
    const sim::FlowField field = disk::flow_field(f);
    const State x0{radius, 0.0};
    const sim::Trajectory tr = sim::integrate(field, x0, period, tol);
    const double closure = dist2(tr.end(), x0) / radius;
    const sim::PeriodResult pr = sim::detect_period(field, x0, period, std::max(tol * 1e3, 1e-6));
    const double rel = pr.found ? std::abs(pr.period - period) / period : std::numeric_limits<double>::quiet_NaN();
    RunOutput out;
    out.columns = {{"flow", "disk field"},
                   {"radius", "ladder circle radius"},
                   {"period", "analytic minimal period"},
                   {"closure", "|x(period) - x0| / |x0|"},
                   {"detected_period", "period refined on the section through x0"},
                   {"period_rel_error", "|detected - analytic| / analytic"},
                   {"steps", "accepted integrator steps over one period"}};
    out.records.push_back(ordered_json{{"flow", disk::variant_name(f.variant())},
                                       {"radius", radius},
                                       {"period", period},
                                       {"closure", closure},
                                       {"detected_period", pr.found ? ordered_json(pr.period) : ordered_json()},
                                       {"period_rel_error", pr.found ? ordered_json(rel) : ordered_json()},
                                       {"steps", tr.stats.accepted}});
    out.low_confidence = !pr.found || tr.stop != sim::StopReason::completed;
    return out;
}

susp::BaseMap parse_base(const std::string& s)
{
    if (s == "golden") return susp::BaseMap::golden_rotation();
    if (s == "cat") return susp::BaseMap::cat_map();
    if (s == "identity") return susp::BaseMap::identity(2);
    throw InvalidInput("unknown base '" + s + "' (expected golden, cat or identity)");
}

RunOutput suspension(const ResolvedConfig& c)
{
    const susp::BaseMap base = parse_base(c.get("base"));
    const susp::SuspensionSpace space(base);
    const double speed = c.get_double("speed");
    const double t = c.get_double("t");
    if (!(t >= 0.0 && t <= 1e7)) throw InvalidInput("parameter 't' must lie in [0, 1e7]");
    const susp::SuspendedFlow flow = susp::reparam(space, speed);
    State q;
    if (c.get("start") == "auto") {
        const double defaults[2] = {0.1234, 0.5678};
        for (int i = 0; i < base.dim(); ++i) q.push_back(defaults[i]);
        q.push_back(0.0);
    } else {
        q = c.get_doubles("start");
        if (static_cast<int>(q.size()) != space.dim())
            throw InvalidInput("parameter 'start' needs " + std::to_string(space.dim()) + " values");
    }
    q = space.normalize(q);
    RunOutput out;
    out.columns = {{"t", "time"}};
    for (int i = 0; i < base.dim(); ++i) out.columns.push_back({"y" + std::to_string(i + 1), "base coordinate"});
    out.columns.push_back({"s", "height in the fiber"});
    const long steps = static_cast<long>(std::floor(t));
    for (long k = 0; k <= steps; ++k) {
        if (k > 0) q = flow.advance(q, 1.0).q;
        ordered_json r{{"t", static_cast<double>(k)}};
        for (int i = 0; i < base.dim(); ++i) r["y" + std::to_string(i + 1)] = q[static_cast<std::size_t>(i)];
        r["s"] = q.back();
        out.records.push_back(std::move(r));
    }
    return out;
}

RunOutput abramov(const ResolvedConfig& c)
{
    susp::AbramovParams p;
    const long long seeds = c.get_int("seeds");
    if (seeds < 2 || seeds > 100000) throw InvalidInput("parameter 'seeds' must lie in [2, 100000]");
    p.seeds = static_cast<std::size_t>(seeds);
    p.t = c.get_double("t");
    if (!(p.t >= 1.0 && p.t <= 64.0)) throw InvalidInput("parameter 't' must lie in [1, 64]");
    p.eps = c.get_doubles("eps");
    for (double e : p.eps)
        if (!(e > 0.0 && e < 0.5)) throw InvalidInput("parameter 'eps': values must lie in (0, 1/2)");
    p.seed = c.seed;
    const susp::AbramovResult r = susp::abramov_check(parse_base(c.get("base")), c.get_double("roof"), p);
    RunOutput out;
    out.columns = {{"base", "base map"},
                   {"roof", "constant roof"},
                   {"hFlow", "separated-set entropy estimate of the suspension flow"},
                   {"hBase", "separated-set entropy estimate of the base map"},
                   {"ratio", "hFlow * roof / hBase (1 under the Abramov relation)"},
                   {"hReference", "log spectral radius of the base"},
                   {"lowConfidence", "a separated set saturated the seed count"}};
    out.records.push_back(ordered_json{{"base", c.get("base")},
                                       {"roof", r.roof},
                                       {"hFlow", r.h_flow},
                                       {"hBase", r.h_base},
                                       {"ratio", std::isnan(r.ratio) ? ordered_json() : ordered_json(r.ratio)},
                                       {"hReference", r.h_reference},
                                       {"lowConfidence", r.low_confidence}});
    out.low_confidence = r.low_confidence;
    return out;
}

RunOutput slowdown(const ResolvedConfig& c)
{
    const susp::SuspensionSpace space(susp::BaseMap::golden_rotation());
    const std::vector<double> betas = c.get_doubles("betas");
    const int halvings = checked_int(c, "halvings", 0, 20);
    const std::vector<double> centre = c.get_doubles("center");
    if (centre.size() != 2) throw InvalidInput("parameter 'center' needs 2 values");
    const double radius = c.get_double("chart-radius");
    const int grid = checked_int(c, "grid", 1, 100000);
    const std::vector<double> times = c.get_doubles("times");
    const double start = c.get_double("start");
    const double height = c.get_double("region-height");
    if (!(height > 0.0 && height < 1.0)) throw InvalidInput("parameter 'region-height' must lie in (0, 1)");
    for (double t : times)
        if (!(t > 0.0 && t <= 1e7)) throw InvalidInput("parameter 'times': values must lie in (0, 1e7]");

    RunOutput out;
    out.columns = {{"kind", "gammaMean (fiber return time) or occupation (fraction of time with s below the height)"},
                   {"level", "number of times the beta ladder was halved"},
                   {"t", "orbit length (occupation rows)"},
                   {"value", "mean return time or occupation fraction"},
                   {"infinite", "base points whose fiber never returns within the cap (gammaMean rows)"}};
    std::vector<susp::SuspendedFlow> flows;
    for (int level = 0; level <= halvings; ++level) {
        std::vector<double> b = betas;
        for (double& v : b) v = std::ldexp(v, -level);
        flows.push_back(susp::reparam(space, susp::SlowDownSpec::make(space, centre, b, radius)));
    }
    for (int level = 0; level <= halvings; ++level) {
        std::vector<double> g(static_cast<std::size_t>(grid));
        std::vector<char> inf(g.size(), 0);
#pragma omp parallel for schedule(dynamic)
        for (int k = 0; k < grid; ++k) {
            const susp::GammaResult r = susp::gamma_return(flows[static_cast<std::size_t>(level)], {(k + 0.5) / grid});
            g[static_cast<std::size_t>(k)] = r.time;
            inf[static_cast<std::size_t>(k)] = r.infinite;
        }
        double sum = 0.0;
        long infinite = 0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (inf[k]) ++infinite;
            else sum += g[k];
        }
        const long finite = grid - infinite;
        out.records.push_back(ordered_json{{"kind", "gammaMean"},
                                           {"level", level},
                                           {"t", nullptr},
                                           {"value", finite > 0 ? ordered_json(sum / finite) : ordered_json()},
                                           {"infinite", infinite}});
        if (infinite > 0) out.low_confidence = true;
    }
    const sim::Region region = [height](std::span<const double> q) { return q[1] < height; };
    std::vector<double> frac(times.size());
    std::vector<char> short_run(times.size(), 0);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < times.size(); ++k) {
        const sim::OccupancyResult o = susp::occupation(flows.front(), {start, 0.0}, times[k], region);
        frac[k] = o.t_total > 0.0 ? o.J / o.t_total : 0.0;
        short_run[k] = o.t_total < times[k];
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
        out.records.push_back(ordered_json{
            {"kind", "occupation"}, {"level", 0}, {"t", times[k]}, {"value", frac[k]}, {"infinite", nullptr}});
        if (short_run[k]) out.low_confidence = true;
    }
    return out;
}

RunOutput tear_residual(const ResolvedConfig& c)
{
    const std::string v = c.get("variant");
    if (v != "Z" && v != "Z1") throw InvalidInput("parameter 'variant' must be Z or Z1");
    const tear::TearField f(v == "Z" ? tear::TearVariant::Z : tear::TearVariant::Z1);
    const std::string g = c.get("grid");
    std::vector<tear::Grid> grids;
    if (g == "all") grids = {tear::Grid::axis, tear::Grid::sigmaHalf, tear::Grid::rhoHalf};
    else grids = {tear::parse_grid(g)};
    const int points = checked_int(c, "points", 2, 100000);
    const double t_max = c.get_double("tmax");
    const double tol = c.get_double("tol");
    RunOutput out;
    out.columns = {{"grid", "start grid"},
                   {"residual", "sup |Delta(phi(x, t)) - phi_straight(Delta(x), t)|"},
                   {"samples", "grid points"},
                   {"excluded", "trajectories that left the chart"}};
    for (tear::Grid gr : grids) {
        const auto pts = tear::grid_points(gr, points);
        const tear::ResidualReport r = tear::semiconjugacy_residual(f, t_max, pts, tol);
        out.records.push_back(ordered_json{{"grid", tear::grid_name(gr)},
                                           {"residual", r.residual},
                                           {"samples", r.samples},
                                           {"excluded", r.excluded}});
        if (r.excluded == r.samples) out.low_confidence = true;
    }
    return out;
}

RunOutput tear_mirror(const ResolvedConfig& c)
{
    const int dim = checked_int(c, "dim", 3, 64);
    const int n = checked_int(c, "samples", 1, 1000000);
    const double tol = c.get_double("tol");
    const auto samples = tear::departure_samples(dim, static_cast<std::size_t>(n), c.get_double("rho-min"),
                                                 c.get_double("rho-max"), c.seed);
    const tear::RotatedField a(tear::TearField(tear::TearVariant::Z), dim);
    const tear::RotatedField b(tear::TearField(tear::TearVariant::Z1), dim);
    const tear::MirrorReport m = tear::mirror_check(b, samples, tol);
    const tear::RatioReport r = tear::return_ratio(a, b, samples, tol);
    auto num = [](double v) { return std::isnan(v) ? ordered_json() : ordered_json(v); };
    RunOutput out;
    out.columns = {{"samples", "departure points"},
                   {"valid", "points that reached the arrival section"},
                   {"stagnated", "points excluded as stagnating"},
                   {"maxTransverseError", "max |x_i(arrival) - x_i(departure)| over i >= 2"},
                   {"minRatio", "smallest crossing-time ratio tau(Z1) / tau(Z)"},
                   {"maxRatio", "largest crossing-time ratio"}};
    out.records.push_back(ordered_json{{"samples", n},
                                       {"valid", m.valid},
                                       {"stagnated", m.stagnated},
                                       {"maxTransverseError", m.max_transverse_error},
                                       {"minRatio", num(r.min_ratio)},
                                       {"maxRatio", num(r.max_ratio)}});
    out.low_confidence = m.valid == 0 || r.valid == 0;
    return out;
}

RunOutput embed_check(const ResolvedConfig& c)
{
    const disk::Variant v = disk::parse_variant(c.get("flow"));
    if (v == disk::Variant::Z0) throw InvalidInput("parameter 'flow' must be Z1 or Z2");
    const int dim = checked_int(c, "dim", 3, 64);
    const int points = checked_int(c, "points", 1, 10000000);
    const tear::EmbeddedField e(v, checked_int(c, "imax", 2, disk::RadiiLadder::kMaxIndex), dim);
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    double planar_err = 0.0;
    long tail_nonzero = 0;
    State x(static_cast<std::size_t>(dim), 0.0), out(x.size());
    for (int k = 0; k < points; ++k) {
        const double r = std::sqrt(unit(rng)), th = kTwoPi * unit(rng);
        std::fill(x.begin(), x.end(), 0.0);
        x[0] = r * std::cos(th);
        x[1] = r * std::sin(th);
        e.eval(std::span<const double>(x), out);
        const auto d = e.disk().eval(x[0], x[1]);
        planar_err = std::max({planar_err, std::abs(out[0] - d[0]), std::abs(out[1] - d[1])});
        for (std::size_t i = 2; i < out.size(); ++i)
            if (out[i] != 0.0) ++tail_nonzero;
    }
    double min_tail = std::numeric_limits<double>::infinity();
    long nonpositive = 0;
    for (int k = 0; k < points; ++k) {
        double len = 0.0;
        for (double& u : x) {
            u = gauss(rng);
            len += u * u;
        }
        len = std::sqrt(len);
        const double r = std::sqrt(2.0) * std::pow(unit(rng), 1.0 / dim);
        for (double& u : x) u *= r / len;
        if (tear::in_d1(x) || !tear::in_d2(x)) continue;
        e.eval(std::span<const double>(x), out);
        for (std::size_t i = 2; i < out.size(); ++i) {
            min_tail = std::min(min_tail, out[i]);
            if (!(out[i] > 0.0)) ++nonpositive;
        }
    }
    RunOutput res;
    res.columns = {{"flow", "embedded disk field"},
                   {"region", "D1 or D2minusD1"},
                   {"points", "sample points"},
                   {"maxPlanarError", "max deviation of the first two components from the disk field (D1)"},
                   {"violations", "trailing components nonzero on D1, or nonpositive on D2minusD1"},
                   {"minTail", "smallest trailing component (D2minusD1)"}};
    const std::string name = disk::variant_name(v);
    res.records.push_back(ordered_json{{"flow", name},
                                       {"region", "D1"},
                                       {"points", points},
                                       {"maxPlanarError", planar_err},
                                       {"violations", tail_nonzero},
                                       {"minTail", nullptr}});
    res.records.push_back(ordered_json{{"flow", name},
                                       {"region", "D2minusD1"},
                                       {"points", points},
                                       {"maxPlanarError", nullptr},
                                       {"violations", nonpositive},
                                       {"minTail", std::isinf(min_tail) ? ordered_json() : ordered_json(min_tail)}});
    return res;
}

RunOutput bump_audit(const ResolvedConfig& c)
{
    const int dim = checked_int(c, "dim", 1, 64);
    const int samples = checked_int(c, "samples", 1, 10000000);
    const bump::RadialW w = bump::build_w(c.get_doubles("betas"), dim);
    const bump::WAudit a = bump::audit_w(w, static_cast<std::size_t>(samples), c.seed);
    RunOutput out;
    out.columns = {{"check", "property"},
                   {"pass", "whether it holds on the sample"},
                   {"value", "sampled sup (ball bounds) or largest order-3 difference (flatness)"},
                   {"bound", "the bound it is compared with"}};
    out.records.push_back(
        ordered_json{{"check", "wZeroOnlyAtOrigin"}, {"pass", a.zero_only_at_origin}, {"value", nullptr}, {"bound", nullptr}});
    out.records.push_back(
        ordered_json{{"check", "wUnitAnnulus"}, {"pass", a.unit_annulus}, {"value", nullptr}, {"bound", nullptr}});
    for (std::size_t i = 0; i < a.ball_sup.size(); ++i) {
        const int idx = static_cast<int>(i) + 1;
        const double bound = w.ball_bound(idx);
        out.records.push_back(ordered_json{{"check", "wBallBound" + std::to_string(idx)},
                                           {"pass", a.ball_sup[i] <= bound},
                                           {"value", a.ball_sup[i]},
                                           {"bound", bound}});
    }
    auto flat = [&](const std::string& name, const bump::SmoothFn& f, double x0) {
        const bump::FlatnessReport r = bump::flatness_report(f, x0, 3);
        double worst = 0.0;
        for (const auto& o : r.orders)
            for (double m : o.magnitudes) worst = std::max(worst, m);
        out.records.push_back(ordered_json{{"check", name}, {"pass", r.pass}, {"value", worst}, {"bound", nullptr}});
        return r.pass;
    };
    const bool ok = flat("gamma0FlatAt1", bump::SmoothFn::make_gamma0(), 1.0) &
                    flat("psiFlatAt0", bump::SmoothFn::make_psi(), 0.0);
    out.low_confidence = !(a.pass() && ok);
    return out;
}

const std::map<std::string, std::function<RunOutput(const ResolvedConfig&)>>& runners()
{
    static const std::map<std::string, std::function<RunOutput(const ResolvedConfig&)>> m = {
        {"census", census},           {"sphere-census", sphere_census}, {"ep-curve", ep_curve},
        {"orbit-verify", orbit_verify}, {"suspension", suspension},     {"abramov", abramov},
        {"slowdown", slowdown},       {"tear-residual", tear_residual}, {"tear-mirror", tear_mirror},
        {"embed-check", embed_check}, {"bump-audit", bump_audit},
    };
    return m;
}

std::string csv_cell(const ordered_json& v)
{
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isnan(d)) return "nan";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", d);
        return buf;
    }
    return v.dump();
}

}  // namespace

RunOutput run_experiment(const ResolvedConfig& c)
{
    const auto& m = runners();
    const auto it = m.find(c.experiment);
    if (it == m.end()) throw InvalidInput("unknown experiment '" + c.experiment + "'");
    return it->second(c);
}

std::string render(const ResolvedConfig& c, const RunOutput& r)
{
    std::string out;
    if (c.format == Format::csv) {
        for (const std::string& line : describe(c)) out += line + "\n";
        for (const auto& [name, doc] : r.columns) out += "# column " + name + ": " + doc + "\n";
        for (const std::string& n : r.notes) out += "# note: " + n + "\n";
        std::string header;
        for (const auto& col : r.columns) header += (header.empty() ? "" : ",") + col.first;
        out += header + "\n";
        for (const ordered_json& rec : r.records) {
            std::string line;
            bool first = true;
            for (const auto& col : r.columns) {
                if (!first) line += ",";
                first = false;
                const auto f = rec.find(col.first);
                if (f != rec.end()) line += csv_cell(*f);
            }
            out += line + "\n";
        }
        return out;
    }
    ordered_json head;
    head["eqflow"] = kVersion;
    head["experiment"] = c.experiment;
    head["seed"] = c.seed;
    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : c.params) params[k] = v;
    head["config"] = params;
    ordered_json cols = ordered_json::object();
    for (const auto& [name, doc] : r.columns) cols[name] = doc;
    head["columns"] = cols;
    if (!r.notes.empty()) head["notes"] = r.notes;
    out += head.dump() + "\n";
    for (const ordered_json& rec : r.records) out += rec.dump() + "\n";
    return out;
}

std::string metadata_json(const ResolvedConfig& c, const RunOutput& r, double wall_seconds)
{
    ordered_json m;
    m["tool"] = "eqflow";
    m["version"] = kVersion;
    m["experiment"] = c.experiment;
    m["seed"] = c.seed;
    m["format"] = format_name(c.format);
    m["threads"] = c.threads;
    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : c.params) params[k] = v;
    m["config"] = params;
    m["records"] = r.records.size();
    m["lowConfidence"] = r.low_confidence;
    m["wallTimeSeconds"] = wall_seconds;
    return m.dump(2) + "\n";
}

}  // namespace eqflow::cli
