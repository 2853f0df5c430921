#ifndef EQFLOW_INTEGRATOR_HPP
#define EQFLOW_INTEGRATOR_HPP

// Dormand-Prince 5(4) with PI step control and cubic Hermite dense output.

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "eqflow/common.hpp"

namespace eqflow::sim {

/// A vector field in an explicit chart.
class FlowField {
public:
    using Rule = std::function<void(std::span<const double> x, std::span<double> out)>;
    using Bounds = std::function<bool(std::span<const double> x)>;

    FlowField(int dim, Rule rule, Bounds inside = {}, std::string name = "field");

    static FlowField zero(int dim);
    static Bounds box(double half_width);
    static Bounds ball(double radius);

    int dim() const { return dim_; }
    const std::string& name() const { return name_; }
    void eval(std::span<const double> x, std::span<double> out) const { rule_(x, out); }
    State eval(const State& x) const;
    bool inside(std::span<const double> x) const { return !inside_ || inside_(x); }

private:
    int dim_;
    Rule rule_;
    Bounds inside_;
    std::string name_;
};

struct IntegratorOptions {
    double tol = 1e-9;
    double max_step = std::numeric_limits<double>::infinity();
    long max_steps = 20'000'000;
    /// Stop with StopReason::stagnated once |f(x)| falls below this (0 disables).
    double stagnation_speed = 0.0;
};

enum class StopReason { completed, exited, stiff, stagnated, max_steps, event, observer };

std::string stop_name(StopReason r);

struct StepStats {
    long accepted = 0;
    long rejected = 0;
    double max_error = 0.0;  ///< largest accepted scaled error estimate
};

/// One accepted step, with Hermite interpolation and an exact re-step.
struct Segment {
    const FlowField* field = nullptr;
    double t0 = 0.0, t1 = 0.0;
    State x0, x1, f0, f1;

    State hermite(double t) const;
    /// A single Dormand-Prince step of size t - t0 from x0 (same accuracy as the step itself).
    State exact(double t) const;
};

/// Terminal event: stop where g changes sign in `direction` (+1: from negative
/// to nonnegative, -1: from positive to nonpositive).
struct Event {
    std::function<double(std::span<const double>)> g;
    int direction = +1;
};

struct RunResult {
    StopReason stop = StopReason::completed;
    double t = 0.0;
    State x;
    StepStats stats;
};

using Observer = std::function<bool(const Segment&)>;  ///< return false to stop

/// Advances x from t0 to t1 (t1 >= t0). Step endpoints land exactly on every
/// time in `stops`. Chart exits are located by bisection on exact re-steps,
/// events by the Illinois method on exact re-steps.
RunResult advance(const FlowField& f, State x, double t0, double t1, const IntegratorOptions& opt,
                  const Observer& observer = {}, std::span<const double> stops = {},
                  const Event* terminal = nullptr);

/// Root of g along a segment, given g at both ends with a sign change.
double locate_root(const Segment& s, const std::function<double(std::span<const double>)>& g, double g0,
                   double g1);

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<State> derivs;
    StepStats stats;
    StopReason stop = StopReason::completed;
    const FlowField* field = nullptr;

    bool exited() const { return stop == StopReason::exited; }
    bool stiff() const { return stop == StopReason::stiff; }
    const State& end() const { return states.back(); }
    double t_end() const { return times.back(); }
    /// Hermite dense output (clamped to the recorded range).
    State at(double t) const;
};

/// Trajectory over [0, t]; tol must lie in [1e-12, 1e-4].
Trajectory integrate(const FlowField& f, const State& x0, double t, double tol);
Trajectory integrate(const FlowField& f, const State& x0, double t, const IntegratorOptions& opt);

/// States at the given increasing times (t >= 0), landing on each exactly.
/// Stops early (fewer states) if the run ends before the last time.
std::vector<State> sample(const FlowField& f, const State& x0, std::span<const double> times,
                          const IntegratorOptions& opt, StopReason* reason = nullptr);

/// `t,x1,...,xd` rows.
std::string trajectory_csv(const Trajectory& tr);

void check_tol(double tol);

}  // namespace eqflow::sim

#endif
