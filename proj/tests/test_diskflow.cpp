#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "doctest.h"
#include "eqflow/diskflow.hpp"
#include "eqflow/flowsim.hpp"

using namespace eqflow;
using namespace eqflow::disk;
using boost::multiprecision::cpp_rational;

namespace {

// Strip sizes summed from scratch: strip k holds 2 * 2^{2^k} + 1 circles.
BigInt closed_form(int n)
{
    BigInt total = 2;  // centre and boundary circle
    for (int k = 2; k <= n; ++k) total += (BigInt(1) << ((1 << k) + 1)) + 1;
    return total;
}

// Brute force over the materialized ladder: Z1 strip k has period 2 pi k^2.
BigInt brute_census_z1(const RadiiLadder& lad, double t)
{
    BigInt n = 1;  // centre
    for (const auto& g : lad.materialize_merged()) {
        const double period = g.strip == 0 ? kTwoPi : kTwoPi * g.strip * g.strip;
        if (period <= t * (1 + 1e-12)) n += 1;
    }
    return n;
}

double ep_oracle(const BigInt& n, double log_t)
{
    using F = boost::multiprecision::cpp_bin_float_50;
    const F ln = boost::multiprecision::log(F(n));
    return static_cast<double>(ln) / std::exp(log_t);
}

cpp_rational exact_radius(int i, long long j)
{
    cpp_rational step = cpp_rational(1, i * (i + 1));
    step /= cpp_rational(BigInt(1) << (1 << (i + 2)));
    return cpp_rational(1, i) + cpp_rational(j) * step;
}

}  // namespace

TEST_CASE("strip bookkeeping")
{
    const auto lad = RadiiLadder::build(8);
    for (int i = 2; i <= 8; ++i) {
        const Strip& s = lad.strip(i);
        CHECK(s.center == 1.0 / i);
        CHECK(s.l == doctest::Approx(1.0 / (i * (i + 1))).epsilon(1e-15));
        CHECK(s.half_count == (BigInt(1) << (1 << i)));
        CHECK(s.count == 2 * s.half_count + 1);
    }
    CHECK(lad.merged_size() == closed_form(8) - 1);
    CHECK(lad.cumulative(3) == lad.strip(2).count + lad.strip(3).count);
    CHECK_THROWS_AS(RadiiLadder::build(1), InvalidInput);
    CHECK_THROWS_AS(RadiiLadder::build(9), InvalidInput);
    CHECK_THROWS_AS(lad.strip(9), InvalidInput);
}

TEST_CASE("merged radii strictly decrease in exact arithmetic")
{
    const auto lad = RadiiLadder::build(4);
    const auto seq = lad.materialize_merged();
    REQUIRE(seq.size() == (closed_form(4) - 1).convert_to<std::size_t>());
    cpp_rational prev = 2;
    for (const auto& g : seq) {
        const cpp_rational r = g.strip == 0 ? cpp_rational(1) : exact_radius(g.strip, g.j);
        CHECK(r < prev);
        CHECK(r > 0);
        prev = r;
    }
}

TEST_CASE("double radii agree with exact radii on resolvable strips")
{
    const auto lad = RadiiLadder::build(3);
    for (const auto& g : lad.materialize_merged()) {
        if (g.strip == 0) continue;
        const double exact = static_cast<double>(exact_radius(g.strip, g.j));
        const double r = lad.radius(g);
        CHECK(std::abs(r - exact) <= 2.0 * std::abs(std::nextafter(exact, 2.0) - exact));
        const auto back = lad.locate(r);
        REQUIRE(back.has_value());
        CHECK(*back == g);
    }
    CHECK_FALSE(lad.locate(0.4).has_value());
}

TEST_CASE("Z1 census against brute force on small ladders")
{
    for (int imax = 2; imax <= 4; ++imax) {
        const DiskField f(Variant::Z1, RadiiLadder::build(imax));
        for (double t : {1.0, kTwoPi, 4 * kTwoPi, 8 * kTwoPi, 9 * kTwoPi, 16 * kTwoPi, 1000.0}) {
            CHECK(census(f, t).count == brute_census_z1(f.ladder(), t));
        }
    }
}

TEST_CASE("Z1 census closed form and ep up to n = 8")
{
    const DiskField f(Variant::Z1, RadiiLadder::build(8));
    for (int n = 2; n <= 8; ++n) {
        const LogReal t = canonical_time(Variant::Z1, n);
        const CensusRow row = census(f, t);
        CHECK(row.count == closed_form(n));
        CHECK(row.ep_estimate == doctest::Approx(ep_oracle(row.count, t.log_value)).epsilon(1e-12));
        CHECK(std::exp(t.log_value) == doctest::Approx(kTwoPi * n * n).epsilon(1e-14));
    }
    // just below the next period nothing new appears
    CHECK(census(f, kTwoPi * 9 * 0.999).count == closed_form(2));
}

TEST_CASE("Z1 census at 8 pi: 35 on the disk, 69 on the sphere")
{
    const DiskField f(Variant::Z1, RadiiLadder::build(8));
    CHECK(census(f, 8 * std::numbers::pi).count == 35);
    CHECK(sphere_census(f, 8 * std::numbers::pi) == 69);
    CensusOptions bare{false, false};
    CHECK(census(f, 8 * std::numbers::pi, bare).count == 33);
}

TEST_CASE("Z2 ep decreases to zero")
{
    const DiskField f(Variant::Z2, RadiiLadder::build(8));
    double prev = 1e300;
    for (int i = 2; i <= 8; ++i) {
        const LogReal t = canonical_time(Variant::Z2, i);
        const CensusRow row = census(f, t);
        CHECK(row.count == closed_form(i));
        const double ep = ep_oracle(row.count, t.log_value);
        CHECK(row.ep_estimate == doctest::Approx(ep).epsilon(1e-10));
        CHECK(ep < prev);
        prev = ep;
        if (i == 4) CHECK(ep < 1e-4);
    }
}

TEST_CASE("Z0 puts every circle at period 2 pi")
{
    const DiskField f(Variant::Z0, RadiiLadder::build(5));
    CHECK(census(f, 6.0).count == 1);
    CHECK(census(f, kTwoPi).count == f.ladder().merged_size() + 1);
}

TEST_CASE("field values")
{
    const DiskField z1(Variant::Z1, RadiiLadder::build(6));
    const auto v = z1.eval(0.5, 0.0);
    CHECK(v[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(0.125).epsilon(1e-15));
    const DiskField z0(Variant::Z0, RadiiLadder::build(6));
    const auto w = z0.eval(0.0, 0.5);
    CHECK(w[0] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(std::abs(w[1]) < 1e-15);
    CHECK_THROWS_AS(z1.eval(0.9, 0.9), InvalidInput);
    CHECK(z0.eval(0.0, 0.0)[0] == 0.0);
    // speed is 1 far from the strips and monotone through a blend
    CHECK(z1.speed(0.97) == 1.0);
    double prev = z1.speed(z1.ladder().strip(2).hi());
    for (int k = 1; k <= 50; ++k) {
        const double s = z1.speed(z1.ladder().strip(2).hi() + k * z1.ladder().strip(2).l / 400.0);
        CHECK(s >= prev);
        prev = s;
    }
}

TEST_CASE("ladder circles are closed orbits of the right period")
{
    const DiskField z1(Variant::Z1, RadiiLadder::build(4));
    const auto ff = flow_field(z1);
    const double r = 1.0 / 3.0;
    const auto rec = orbit_period(z1, r);
    CHECK(rec.minimal_period.value() == doctest::Approx(kTwoPi * 9).epsilon(1e-12));
    const auto p = sim::detect_period(ff, {r, 0.0}, rec.minimal_period.value(), 1e-10);
    REQUIRE(p.found);
    CHECK(p.period == doctest::Approx(kTwoPi * 9).epsilon(1e-7));
    CHECK_THROWS_AS(orbit_period(z1, 0.4), InvalidInput);
}

TEST_CASE("sphere field is tangent")
{
    const DiskField z1(Variant::Z1, RadiiLadder::build(4));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    for (int k = 0; k < 200; ++k) {
        const auto p = sphere_lift(u(rng), u(rng), k % 2 ? 1 : -1);
        const auto v = sphere_field(z1, p);
        CHECK(std::abs(p[0] * v[0] + p[1] * v[1] + p[2] * v[2]) < 1e-12);
    }
}

TEST_CASE("ep_curve parallel equals serial")
{
    const DiskField f(Variant::Z1, RadiiLadder::build(8));
    std::vector<LogReal> ts;
    for (int n = 2; n <= 8; ++n) ts.push_back(canonical_time(Variant::Z1, n));
    const auto a = ep_curve(f, ts);
    const auto b = ep_curve_serial(f, ts);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        CHECK(a.rows[k].count == b.rows[k].count);
        CHECK(a.rows[k].ep_estimate == b.rows[k].ep_estimate);
    }
    std::vector<LogReal> bad{ts[1], ts[0]};
    CHECK_THROWS_AS(ep_curve(f, bad), InvalidInput);
}
