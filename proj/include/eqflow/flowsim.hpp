#ifndef EQFLOW_FLOWSIM_HPP
#define EQFLOW_FLOWSIM_HPP

// Chart-level flow tools: period confirmation, Poincare sections, occupation
// times and separated-set entropy witnesses.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eqflow/integrator.hpp"

namespace eqflow::sim {

struct PeriodResult {
    bool found = false;
    bool fixed_point = false;  ///< period reported as 0
    double period = 0.0;
    double closure = 0.0;  ///< |x(T) - x0|
};

/// Refines the return time nearest `guess` on the section through x0 normal
/// to f(x0). Searches up to 2 * guess.
PeriodResult detect_period(const FlowField& f, const State& x0, double guess, double tol);

struct SectionSpec {
    State normal;      ///< unit vector
    double offset = 0.0;
    int orientation = +1;  ///< +1: crossing with normal.x - offset increasing

    double value(std::span<const double> x) const;
    static SectionSpec make(State normal, double offset, int orientation);
};

struct ReturnResult {
    bool found = false;
    bool stagnated = false;
    State point;
    double tau = 0.0;
};

/// First oriented crossing of the section for t > 0 (a start point sitting on
/// the section does not count), located on exact re-steps.
ReturnResult first_return(const FlowField& f, const State& x0, const SectionSpec& s, double t_max,
                          const IntegratorOptions& opt = {});

using Region = std::function<bool(std::span<const double>)>;
using Ratio = std::function<double(std::span<const double>)>;

struct OccupancyResult {
    double t_total = 0.0;
    double J = 0.0;
    double lambda = 0.0;  ///< only with a speed ratio
    bool has_lambda = false;
};

/// Time spent in `region` along the orbit over [0, t]. With `ratio` (speed of
/// the second field over the first, positive inside the region) lambda is the
/// time the second field spends crossing the same pieces of orbit inside the
/// region plus the time outside.
OccupancyResult occupation(const FlowField& f, const State& x0, double t, const Region& region,
                           const IntegratorOptions& opt = {}, const Ratio& ratio = {});

/// Adds one segment's time in `region` to acc.J and, with `ratio`, the
/// changed-speed crossing time to acc.lambda (the outside part is added by
/// the caller once the total is known).
void accumulate_occupation(const Segment& seg, const Region& region, const Ratio& ratio, OccupancyResult& acc);

/// Integer-time samples of many orbits: samples[seed][k] is the state at time k.
struct OrbitSamples {
    std::size_t seeds = 0;
    std::size_t times = 0;  ///< samples per orbit (floor(t) + 1)
    std::size_t dim = 0;
    std::vector<double> data;

    std::span<const double> at(std::size_t seed, std::size_t k) const
    {
        return {data.data() + (seed * times + k) * dim, dim};
    }
    std::span<double> at(std::size_t seed, std::size_t k)
    {
        return {data.data() + (seed * times + k) * dim, dim};
    }
};

/// Orbit samples at times 0..floor(t), in parallel over seeds.
OrbitSamples sample_orbits(const FlowField& f, const std::vector<State>& seeds, double t,
                           const IntegratorOptions& opt = {});
OrbitSamples sample_orbits_serial(const FlowField& f, const std::vector<State>& seeds, double t,
                                  const IntegratorOptions& opt = {});

using Metric = std::function<double(std::span<const double>, std::span<const double>)>;

double euclidean(std::span<const double> a, std::span<const double> b);

/// Upper-triangular matrix of max-over-sample-times distances.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * (n - 1) / 2) {}
    std::size_t size() const { return n_; }
    double at(std::size_t i, std::size_t j) const { return d_[index(i, j)]; }
    double& at(std::size_t i, std::size_t j) { return d_[index(i, j)]; }

private:
    std::size_t index(std::size_t i, std::size_t j) const
    {
        if (i > j) std::swap(i, j);
        return j * (j - 1) / 2 + i;
    }
    std::size_t n_ = 0;
    std::vector<double> d_;
};

DistanceMatrix orbit_distances(const OrbitSamples& s, const Metric& m);

/// Greedy separated subset: seeds in order, kept if at distance >= eps from every kept seed.
std::size_t greedy_separated(const DistanceMatrix& d, double eps);

struct SeparatedSetEstimate {
    double t = 0.0;
    double epsilon = 0.0;
    std::size_t cardinality = 0;
    double h_estimate = 0.0;
    std::size_t sample_size = 0;
};

SeparatedSetEstimate separated_entropy(const OrbitSamples& s, double t, double eps, const Metric& m = euclidean);
/// Same greedy rule computing distances on demand, single-threaded.
SeparatedSetEstimate separated_entropy_serial(const OrbitSamples& s, double t, double eps,
                                              const Metric& m = euclidean);
/// One estimate per eps from a single distance matrix.
std::vector<SeparatedSetEstimate> separated_entropy_grid(const OrbitSamples& s, double t,
                                                         std::span<const double> eps,
                                                         const Metric& m = euclidean);
SeparatedSetEstimate separated_entropy(const FlowField& f, const std::vector<State>& seeds, double t, double eps,
                                       const Metric& m = euclidean, const IntegratorOptions& opt = {});

std::string estimate_jsonl(const SeparatedSetEstimate& e);

}  // namespace eqflow::sim

#endif
