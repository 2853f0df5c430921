#ifndef EQFLOW_SUSPENSION_HPP
#define EQFLOW_SUSPENSION_HPP

// Suspension flows over circle rotations and torus automorphisms, their time
// changes, additive functions and entropy checks. Points of the suspension are
// (y, s) with y in [0,1)^d and s in [0,1), and (y, 1) is glued to (f(y), 0).

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eqflow/bumpkit.hpp"
#include "eqflow/flowsim.hpp"

namespace eqflow::susp {

double wrap01(double v);
/// Representative of a - b in [-1/2, 1/2).
double wrapped_diff(double a, double b);
/// Max-coordinate distance on the flat torus.
double torus_distance(std::span<const double> a, std::span<const double> b);

class BaseMap {
public:
    enum class Variant { circleRotation, torusAutomorphism, identity, custom };
    using Map = std::function<void(std::span<const double>, std::span<double>)>;

    static BaseMap circle_rotation(double angle);
    static BaseMap golden_rotation();
    /// Row-major 2x2 integer matrix; throws InvalidInput unless |det| = 1.
    static BaseMap torus_automorphism(std::array<long long, 4> m);
    static BaseMap cat_map() { return torus_automorphism({2, 1, 1, 1}); }
    static BaseMap identity(int dim);
    static BaseMap custom(int dim, Map forward, Map inverse, std::string name);

    Variant variant() const { return variant_; }
    int dim() const { return dim_; }
    const std::string& name() const { return name_; }
    double angle() const { return angle_; }
    const std::array<long long, 4>& matrix() const { return m_; }

    void apply(std::span<const double> y, std::span<double> out) const;
    void apply_inverse(std::span<const double> y, std::span<double> out) const;
    State apply(const State& y) const;
    State apply_inverse(const State& y) const;

    /// Unit vector along the most expanding eigendirection (e1 when there is none).
    State unstable_direction() const;
    /// log of the spectral radius (topological entropy of the base).
    double log_spectral_radius() const;

private:
    Variant variant_ = Variant::identity;
    int dim_ = 1;
    std::string name_;
    double angle_ = 0.0;
    std::array<long long, 4> m_{1, 0, 0, 1};
    std::array<long long, 4> inv_{1, 0, 0, 1};
    Map fwd_, inv_map_;
};

using Observable = std::function<double(std::span<const double>)>;

class SuspensionSpace {
public:
    explicit SuspensionSpace(BaseMap base);

    const BaseMap& base() const { return base_; }
    int dim() const { return base_.dim() + 1; }

    /// Canonical representative (y in [0,1)^d, s in [0,1)), crossing the seam as often as needed.
    State normalize(State q) const;
    /// Product max-metric, minimised over the representatives across the seam.
    double distance(std::span<const double> a, std::span<const double> b) const;
    /// Shortest displacement from p to q over the representatives of q.
    State displacement(std::span<const double> p, std::span<const double> q) const;
    /// Time-one map of the unit-speed flow restricted to the zero fiber.
    State time_one(const State& y) const { return base_.apply(y); }

private:
    BaseMap base_;
};

/// Slow-down around p0: alpha(q) = w(displacement(p0, q) / chart_radius), 1 off the chart.
struct SlowDownSpec {
    State center;
    std::shared_ptr<const bump::RadialW> profile;
    double chart_radius = 0.25;

    static SlowDownSpec make(const SuspensionSpace& space, State center, std::vector<double> betas,
                             double chart_radius = 0.25);
    double alpha(const SuspensionSpace& space, std::span<const double> q) const;
};

struct AdvanceResult {
    State q;
    double t = 0.0;         ///< time actually flowed
    bool stalled = false;   ///< stagnation, stiffness or step cap inside a fiber
    long seam_crossings = 0;
};

/// The time-changed flow alpha * X on a suspension, integrated one fiber at a time.
class SuspendedFlow {
public:
    SuspendedFlow(SuspensionSpace space, Observable alpha, std::string name,
                  std::optional<double> constant = std::nullopt);

    const SuspensionSpace& space() const { return space_; }
    const std::string& name() const { return name_; }
    double speed(std::span<const double> q) const { return alpha_(q); }
    std::optional<double> constant_speed() const { return constant_; }
    /// In-fiber field (0, ..., 0, alpha) on the chart s in [0, 1].
    const sim::FlowField& field() const { return field_; }

    /// Seam-aware flow for time t. Constant speeds are advanced in closed form
    /// unless an observer is attached.
    AdvanceResult advance(const State& q, double t, const sim::IntegratorOptions& opt = {},
                          const sim::Observer& observer = {}) const;

private:
    SuspensionSpace space_;
    Observable alpha_;
    std::string name_;
    std::optional<double> constant_;
    sim::FlowField field_;
};

SuspendedFlow suspend(const BaseMap& base);  ///< unit speed
SuspendedFlow reparam(const SuspensionSpace& space, double constant_speed);
/// Throws InvalidInput if alpha is negative at any of the probe points.
SuspendedFlow reparam(const SuspensionSpace& space, Observable alpha, std::string name = "custom");
SuspendedFlow reparam(const SuspensionSpace& space, const SlowDownSpec& spec);

struct GammaResult {
    double time = 0.0;
    bool infinite = false;
};

/// Time to traverse one fiber from (y, 0) to (f(y), 0).
GammaResult gamma_return(const SuspendedFlow& flow, const State& y, double time_cap = 1e9);

/// Orbit integral of a along the time-changed flow over [0, t].
double theta(const SuspendedFlow& flow, const Observable& a, const State& q, double t,
             const sim::IntegratorOptions& opt = {});

sim::OccupancyResult occupation(const SuspendedFlow& flow, const State& q, double t, const sim::Region& region,
                                const sim::IntegratorOptions& opt = {});

struct AverageResult {
    double value = 0.0;
    double weight = 0.0;  ///< integral of a, the estimate of E(a) times the orbit length
    bool low_confidence = false;
};

/// (integral of g * a) / (integral of a) along the unit-speed orbit of q over [0, orbit_length].
AverageResult suspended_average(const SuspensionSpace& space, const Observable& a, const Observable& g,
                                double orbit_length, const State& q);

/// Minimum over a grid of centres of the visit frequency of eps-balls by the orbit of 0.
double min_ball_frequency(const BaseMap& rotation, double eps, long orbit_length, int centres = 1000);

/// beta_{i-1} = l_{i0+i} / (i0+i) * delta(i0+i), l_j = 1/(2j), delta(j) the
/// minimum ball frequency at radius 1/j; i0 >= 3.
std::vector<double> estimate_beta_ladder(const BaseMap& rotation, int i0, int n, long orbit_length = 100000);

/// Integer-time samples of suspension orbits (parallel over seeds).
sim::OrbitSamples sample_orbits(const SuspendedFlow& flow, const std::vector<State>& seeds, double t,
                                const sim::IntegratorOptions& opt = {});
sim::OrbitSamples sample_orbits_serial(const SuspendedFlow& flow, const std::vector<State>& seeds, double t,
                                       const sim::IntegratorOptions& opt = {});

struct AbramovParams {
    std::size_t seeds = 4096;
    double t = 8.0;
    std::vector<double> eps = {0.1, 0.07, 0.05};
    std::uint64_t seed = 1;
};

struct AbramovResult {
    double h_flow = 0.0;
    double h_base = 0.0;
    double ratio = 0.0;        ///< h_flow * roof / h_base
    double h_reference = 0.0;  ///< log spectral radius of the base
    double roof = 1.0;
    bool low_confidence = false;
    std::vector<sim::SeparatedSetEstimate> flow_estimates, base_estimates;
};

/// Seeds lie on a segment of length eps through a random anchor along the
/// expanding direction; estimates are maxima over the eps grid.
AbramovResult abramov_check(const BaseMap& base, double roof, const AbramovParams& p = {});

}  // namespace eqflow::susp

#endif
