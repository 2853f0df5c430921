#ifndef EQFLOW_COMMON_HPP
#define EQFLOW_COMMON_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqflow {

/// Rejected caller input (domain violation, bad parameters).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using State = std::vector<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double norm2(const State& v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double dist2(const State& a, const State& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// C-infinity transition: 0 for u <= 0, 1 for u >= 1, strictly monotone between.
inline double smooth_step(double u)
{
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

}  // namespace eqflow

#endif
