#ifndef EQFLOW_TEARKIT_HPP
#define EQFLOW_TEARKIT_HPP

// Tear charts: the planar field Z whose flow projects onto a horizontal
// eta-scaled flow, its smoothed version Z1, their rotations about the x1-axis
// and the disk fields embedded in higher dimension.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "eqflow/diskflow.hpp"
#include "eqflow/flowsim.hpp"

namespace eqflow::tear {

enum class Region { U1, V1, W1, outside };

std::string region_name(Region r);

/// Region label and curve parameter: a for U1 (x2 = a gamma0), b for V1 and
/// W1 (the sigma_b curve), the height |x2| outside. Points with x2 < 0 are
/// classified by their mirror image.
struct Classification {
    Region region = Region::outside;
    double a = 0.0;
    double b = 0.0;
};

/// Bands over |x1| < 2: U1 = {0 <= x2 <= g}, V1 = {g < x2 <= g + 1},
/// W1 = {g + 1 < x2 <= 2} with g = gamma0(x1). Everything else is outside.
Classification classify(double x1, double x2);

/// Delta: (x1, 0) on U1, (x1, +-b) on V1 and W1, the identity outside.
std::array<double, 2> delta(double x1, double x2);

/// The comparison field (eta(y1, |y2|), 0) whose flow Delta conjugates to.
std::array<double, 2> straight_eval(double y1, double y2);

enum class TearVariant { Z, Z1 };

std::string variant_name(TearVariant v);

class TearField {
public:
    explicit TearField(TearVariant v = TearVariant::Z) : variant_(v) {}

    TearVariant variant() const { return variant_; }
    std::array<double, 2> eval(double x1, double x2) const;
    /// Planar flow confined to the box |x_i| <= half_width.
    sim::FlowField flow_field(double half_width = 6.0) const;

private:
    TearVariant variant_;
};

/// The planar field rotated about the x1-axis into dimension dim >= 3.
class RotatedField {
public:
    explicit RotatedField(TearField planar, int dim = 5);

    const TearField& planar() const { return planar_; }
    int dim() const { return dim_; }
    void eval(std::span<const double> x, std::span<double> out) const;
    State eval(const State& x) const;
    /// Flow confined to the ball of the given radius.
    sim::FlowField flow_field(double radius = 6.0) const;

private:
    TearField planar_;
    int dim_;
};

/// Rotational lift of Delta: Delta(x1, rho) with rho the distance to the axis.
std::array<double, 2> pi_tilde(std::span<const double> x);

enum class Grid { axis, sigmaHalf, rhoHalf };

std::string grid_name(Grid g);
Grid parse_grid(const std::string& s);

/// n points on the x1-axis over [-2.5, 2.5], on sigma_{1/2} over the same
/// range, or on rho_{1/2} over (-1, 1).
std::vector<std::array<double, 2>> grid_points(Grid g, int n);

struct ResidualReport {
    double residual = 0.0;
    std::size_t samples = 0;
    std::size_t excluded = 0;  ///< trajectories that left the chart before tMax
};

/// sup over the grid and 100 uniform times in (0, tMax] of
/// |Delta(phi_field(x, t)) - phi_straight(Delta(x), t)|.
ResidualReport semiconjugacy_residual(const TearField& f, double t_max, std::span<const std::array<double, 2>> grid,
                                      double tol = 1e-9);
/// Same with pi_tilde for grid points of the rotated chart.
ResidualReport semiconjugacy_residual(const RotatedField& f, double t_max, const std::vector<State>& grid,
                                      double tol = 1e-9);

/// Departure points (-3, rho u) with rho uniform in [rho_min, rho_max] and u a
/// uniformly random unit vector.
std::vector<State> departure_samples(int dim, std::size_t n, double rho_min, double rho_max, std::uint64_t seed);

struct MirrorResult {
    bool found = false;
    bool stagnated = false;
    double tau = 0.0;
    State arrival;
    double transverse_error = 0.0;  ///< max_i |arrival_i - departure_i| over i >= 2
};

/// Flow from the departure section x1 = -3 to the arrival section x1 = +3.
MirrorResult mirror_return(const RotatedField& f, const State& x0, double t_max = 1e7, double tol = 1e-9);

struct MirrorReport {
    double max_transverse_error = 0.0;
    std::size_t valid = 0;
    std::size_t stagnated = 0;
    std::size_t missing = 0;  ///< neither arrived nor stagnated
};

MirrorReport mirror_check(const RotatedField& f, const std::vector<State>& samples, double tol = 1e-9);

struct RatioReport {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    std::size_t valid = 0;
    std::size_t stagnated = 0;
    std::vector<double> ratios;  ///< per sample, NaN when excluded
};

/// Crossing-time ratios tau_b / tau_a between the two sections.
RatioReport return_ratio(const RotatedField& a, const RotatedField& b, const std::vector<State>& samples,
                         double tol = 1e-9);

std::string residual_jsonl(const std::string& grid, const ResidualReport& r);
std::string ratio_jsonl(const RatioReport& r);

/// `x1,x2,z1,z2` rows on an n x n grid over [lo, hi]^2.
std::string field_grid_csv(const TearField& f, double lo, double hi, int n);

/// A disk field placed on the x1x2-plane of R^dim and extended so that the
/// region between the unit disk D1 and the ball D2 of radius sqrt(2) is
/// swept monotonically in x3 + ... + x_dim.
class EmbeddedField {
public:
    using Ambient = std::function<void(std::span<const double>, std::span<double>)>;

    EmbeddedField(disk::Variant v, int i_max = 6, int dim = 5, Ambient ambient = {});

    disk::Variant variant() const { return disk_.variant(); }
    int dim() const { return dim_; }
    const disk::DiskField& disk() const { return disk_; }

    /// ((rbar - 1)_+^3 + sum_{i>=3} x_i^2) (2 - |x|^2)_+^3, rbar = |(x1, x2)|.
    double varsigma(std::span<const double> x) const;
    /// 1 on |x|^2 <= 1, 0 on |x|^2 >= 2.
    double chi(std::span<const double> x) const;
    double beta_hat(std::span<const double> x) const;

    void eval(std::span<const double> x, std::span<double> out) const;
    State eval(const State& x) const;
    sim::FlowField flow_field(double radius = 3.0) const;

private:
    disk::DiskField disk_;
    disk::DiskField rotation_;
    int dim_;
    Ambient ambient_;
};

/// Points of the closed unit disk D1 and of D2 \ D1 for sampling.
bool in_d1(std::span<const double> x);
bool in_d2(std::span<const double> x);

}  // namespace eqflow::tear

#endif
