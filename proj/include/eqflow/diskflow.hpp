#ifndef EQFLOW_DISKFLOW_HPP
#define EQFLOW_DISKFLOW_HPP

// Disk flows with prescribed periodic-orbit growth: the radii ladder, the
// rotation field Z0 with invariant circles on the ladder, its speed-rescaled
// variants Z1 (periods 2*pi*n^2) and Z2 (periods 2*pi*2^{2^i}), the exact
// periodic-orbit census and the sphere double cover.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "eqflow/bumpkit.hpp"
#include "eqflow/common.hpp"
#include "eqflow/integrator.hpp"

namespace eqflow::disk {

using BigInt = boost::multiprecision::cpp_int;

/// Natural log of a nonnegative big integer (-inf for 0).
double log_big(const BigInt& n);

struct Strip {
    int index = 0;            ///< i
    double center = 0.0;      ///< a_i = 1/i
    double l = 0.0;           ///< l_i = min(a_i - a_{i+1}, a_{i-1} - a_i)
    int step_exp = 0;         ///< grid step = l_i * 2^{step_exp}, step_exp = -2^{i+2}
    double step = 0.0;        ///< l_i * 2^{step_exp} (may be subnormal)
    double log2_step = 0.0;   ///< exact log2 of the step
    BigInt half_count;        ///< J = 2^{2^i}; grid offsets j run over [-J, J]
    BigInt count;             ///< 2J + 1
    bool resolvable = false;  ///< every b_{i,j} is a distinct double

    double lo() const { return center - l / 4.0; }  ///< L_i = [lo, hi]
    double hi() const { return center + l / 4.0; }
    /// Outermost grid offset |b_{i,+-J} - a_i| = l_i / 2^{3 * 2^i}.
    double max_offset() const;
};

/// A ladder circle: the boundary circle r = 1 or grid point b_{strip, j}.
struct GridPoint {
    int strip = 0;  ///< 0 marks the boundary circle r = 1
    long long j = 0;
    bool operator==(const GridPoint&) const = default;
};

class RadiiLadder {
public:
    static constexpr int kMaxIndex = 8;

    static RadiiLadder build(int i_max = 6);

    int i_max() const { return i_max_; }
    const std::vector<Strip>& strips() const { return strips_; }
    const Strip& strip(int i) const;

    /// Number of merged circles, 1 + sum of strip counts.
    BigInt merged_size() const;
    /// Cumulative bookkeeping I_i = sum_{j<=i} 2^{2^j+1} + i counted from strip 2.
    BigInt cumulative(int i) const;

    /// Radius of a grid point (double; collapses for unresolvable strips).
    double radius(const GridPoint& g) const;
    /// Merged circles in decreasing radius order: r = 1 first, then each strip
    /// from j = +J down to -J. Only for ladders with at most `cap` circles.
    std::vector<GridPoint> materialize_merged(std::size_t cap = std::size_t{1} << 18) const;

    /// The ladder circle at radius r, if r is one (exact for resolvable strips;
    /// for the others any radius inside the grid hull is accepted).
    std::optional<GridPoint> locate(double r) const;

    /// Knots for alpha0 in x = r^2: resolvable strips contribute every b_{i,j}^2,
    /// others their grid hull as a dense gap.
    bump::AlphaKnots alpha_knots() const;

private:
    int i_max_ = 0;
    std::vector<Strip> strips_;
};

enum class Variant { Z0, Z1, Z2 };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& s);

/// Z0 = (-y + alpha0(r^2) x, x + alpha0(r^2) y), and Z1/Z2 = speedProfile(r) * Z0.
class DiskField {
public:
    DiskField(Variant v, RadiiLadder ladder);

    Variant variant() const { return variant_; }
    const RadiiLadder& ladder() const { return ladder_; }

    /// Speed profile of the radius: on L_i it is a_i^2 (Z1) or 2^{-2^i} (Z2),
    /// 1 away from the strips and everywhere for Z0, with a C-infinity monotone
    /// blend over l_i/8 outside each strip edge.
    double speed(double r) const;
    /// Natural log of the strip speed on L_i (exact even when the speed underflows).
    double log_strip_speed(int i) const;

    double alpha(double x) const { return bump::alpha0(knots_, x); }
    const bump::AlphaKnots& knots() const { return knots_; }

    /// Cartesian field; throws InvalidInput for |p| > 1.
    std::array<double, 2> eval(double x, double y) const;
    /// The same rule without the disk check, with alpha0 extended by 0 past r = 1.
    std::array<double, 2> eval_extended(double x, double y) const;

private:
    Variant variant_;
    RadiiLadder ladder_;
    bump::AlphaKnots knots_;
};

/// The field as an integrator input, confined to the closed unit disk (the
/// field is copied).
sim::FlowField flow_field(const DiskField& f);

struct LogReal {
    double log_value = 0.0;
    double value() const { return std::exp(log_value); }
    static LogReal from(double v) { return LogReal{std::log(v)}; }
};

enum class Provenance { analytic, numericallyConfirmed };

struct PeriodicOrbitRecord {
    double radius = 0.0;
    LogReal minimal_period;
    int strip = 0;  ///< 0 for the boundary circle
    Provenance provenance = Provenance::analytic;
};

/// 2*pi / speed(radius) for a ladder circle; InvalidInput for other radii.
PeriodicOrbitRecord orbit_period(const DiskField& f, double radius);

struct CensusRow {
    double t = 0.0;
    double log_t = 0.0;
    BigInt count;
    double log_count = 0.0;
    double ep_estimate = 0.0;
};

struct CensusTable {
    std::vector<CensusRow> rows;
    bool includes_fixed_point = true;
    bool includes_boundary = true;
};

struct CensusOptions {
    bool include_fixed_point = true;
    bool include_boundary = true;
};

/// Periods are compared with a relative slack of 1e-12 so that t = 2*pi*n^2
/// computed by the caller admits strip n.
CensusRow census(const DiskField& f, LogReal t, CensusOptions opt = {});
inline CensusRow census(const DiskField& f, double t, CensusOptions opt = {})
{
    return census(f, LogReal::from(t), opt);
}

/// Rows evaluated in parallel; everything in log space.
CensusTable ep_curve(const DiskField& f, std::span<const LogReal> ts, CensusOptions opt = {});
CensusTable ep_curve_serial(const DiskField& f, std::span<const LogReal> ts, CensusOptions opt = {});

/// Natural census times for a variant: 2*pi*n^2 (Z1), 2*pi*2^{2^n} (Z2), 2*pi*n (Z0).
LogReal canonical_time(Variant v, int n);

/// Orbits on the sphere: the two hemisphere copies of every interior ladder
/// circle, the equator once, and the two poles.
BigInt sphere_census(const DiskField& f, LogReal t);
inline BigInt sphere_census(const DiskField& f, double t) { return sphere_census(f, LogReal::from(t)); }

/// Lift of a disk point to the upper (+1) or lower (-1) hemisphere.
std::array<double, 3> sphere_lift(double x, double y, int hemisphere);
/// Tangent field on the sphere transported from the disk by the vertical projection.
std::array<double, 3> sphere_field(const DiskField& f, std::span<const double> p);

std::string census_csv_header();
std::string census_csv_row(const CensusRow& r);

}  // namespace eqflow::disk

#endif
