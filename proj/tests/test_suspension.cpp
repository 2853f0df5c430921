#include <cmath>
#include <random>

#include "doctest.h"
#include "eqflow/suspension.hpp"

using namespace eqflow;
using namespace eqflow::susp;

namespace {

const double golden_ratio = (1.0 + std::sqrt(5.0)) / 2.0;

// Visit frequency of the worst eps-ball, by direct counting.
double brute_min_frequency(double angle, double eps, long n, int centres)
{
    double best = 1.0;
    for (int j = 0; j < centres; ++j) {
        const double c = static_cast<double>(j) / centres;
        long hits = 0;
        for (long k = 0; k < n; ++k) {
            const double y = wrap01(std::fmod(k * angle, 1.0));
            if (std::abs(wrapped_diff(y, c)) <= eps) ++hits;
        }
        best = std::min(best, static_cast<double>(hits) / n);
    }
    return best;
}

}  // namespace

TEST_CASE("base maps")
{
    CHECK_THROWS_AS(BaseMap::torus_automorphism({2, 0, 0, 1}), InvalidInput);
    const BaseMap cat = BaseMap::cat_map();
    const State y{0.3, 0.6};
    const State fy = cat.apply(y);
    CHECK(fy[0] == doctest::Approx(wrap01(0.6 + 0.6)).epsilon(1e-14));
    CHECK(fy[1] == doctest::Approx(0.9).epsilon(1e-14));
    const State back = cat.apply_inverse(fy);
    CHECK(torus_distance(back, y) < 1e-14);

    const double lambda = (3.0 + std::sqrt(5.0)) / 2.0;
    CHECK(cat.log_spectral_radius() == doctest::Approx(std::log(lambda)).epsilon(1e-14));
    const State u = cat.unstable_direction();
    CHECK(u[1] / u[0] == doctest::Approx(lambda - 2.0).epsilon(1e-12));
    CHECK(std::hypot(u[0], u[1]) == doctest::Approx(1.0));

    const BaseMap g = BaseMap::golden_rotation();
    CHECK(g.angle() == doctest::Approx(golden_ratio - 1.0).epsilon(1e-15));
    CHECK(g.log_spectral_radius() == 0.0);
    CHECK(wrap01(-0.25) == 0.75);
    CHECK(wrapped_diff(0.95, 0.05) == doctest::Approx(-0.1));
}

TEST_CASE("normalize crosses the seam")
{
    const SuspensionSpace space(BaseMap::cat_map());
    const State q = space.normalize({0.2, 0.3, 1.5});
    CHECK(q[0] == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(q[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(q[2] == doctest::Approx(0.5).epsilon(1e-14));
    const State r = space.normalize({0.7, 0.5, -0.5});
    CHECK(r[0] == doctest::Approx(wrap01(0.7 - 0.5)).epsilon(1e-12));
    CHECK(r[1] == doctest::Approx(wrap01(-0.7 + 2 * 0.5)).epsilon(1e-12));
    CHECK(r[2] == doctest::Approx(0.5).epsilon(1e-14));
    // points on either side of the seam are close
    const State a{0.3, 0.6, 0.99};
    const State fy = space.base().apply(State{0.3, 0.6});
    const State b{fy[0], fy[1], 0.01};
    CHECK(space.distance(a, b) == doctest::Approx(0.02).epsilon(1e-9));
    CHECK(space.distance(a, a) == 0.0);
}

TEST_CASE("constant speed: closed form against the fiber integration")
{
    const SuspensionSpace space(BaseMap::golden_rotation());
    const SuspendedFlow closed = reparam(space, 0.5);
    const SuspendedFlow numeric = reparam(space, [](std::span<const double>) { return 0.5; }, "half");
    REQUIRE(closed.constant_speed().has_value());
    REQUIRE_FALSE(numeric.constant_speed().has_value());
    for (double t : {0.3, 1.7, 13.25}) {
        const auto a = closed.advance({0.1, 0.2}, t);
        const auto b = numeric.advance({0.1, 0.2}, t, sim::IntegratorOptions{1e-11});
        CHECK(space.distance(a.q, b.q) < 1e-8);
        CHECK(b.seam_crossings == static_cast<long>(std::floor(0.2 + 0.5 * t)));
    }
    // time one of the unit-speed flow on the zero fiber is the base map
    const SuspendedFlow unit = suspend(BaseMap::golden_rotation());
    const auto one = unit.advance({0.1, 0.0}, 1.0);
    CHECK(std::abs(wrapped_diff(one.q[0], space.time_one({0.1})[0])) < 1e-12);
    CHECK(one.q[1] < 1e-12);
}

TEST_CASE("orbits of a constant reparametrization are the same sets")
{
    const SuspensionSpace space(BaseMap::cat_map());
    const SuspendedFlow unit = reparam(space, 1.0);
    const SuspendedFlow fast = reparam(space, 3.0);
    const State q{0.11, 0.42, 0.3};
    for (double t : {0.5, 2.0, 4.1}) CHECK(space.distance(fast.advance(q, t).q, unit.advance(q, 3.0 * t).q) < 1e-9);
}

TEST_CASE("theta is an additive cocycle")
{
    const SuspensionSpace space(BaseMap::golden_rotation());
    const SuspendedFlow flow = reparam(space, [](std::span<const double> q) { return 1.0 + 0.5 * std::sin(kTwoPi * q[0]); },
                                       "wavy");
    const Observable a = [](std::span<const double> q) { return 2.0 + std::cos(kTwoPi * q[1]); };
    const sim::IntegratorOptions opt{1e-11};
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0), tt(0.0, 3.0);
    for (int k = 0; k < 20; ++k) {
        const State q{u(rng), u(rng)};
        const double t = tt(rng), s = tt(rng);
        const double whole = theta(flow, a, q, t + s, opt);
        const double split = theta(flow, a, q, t, opt) + theta(flow, a, flow.advance(q, t, opt).q, s, opt);
        CHECK(whole == doctest::Approx(split).epsilon(1e-7));
    }
    // constant observable integrates to c * t
    const Observable three = [](std::span<const double>) { return 3.0; };
    CHECK(theta(flow, three, {0.2, 0.7}, 5.0, opt) == doctest::Approx(15.0).epsilon(1e-8));
}

TEST_CASE("return times")
{
    const SuspensionSpace space(BaseMap::golden_rotation());
    CHECK(gamma_return(reparam(space, 1.0), {0.3}).time == 1.0);
    CHECK(gamma_return(reparam(space, 4.0), {0.3}).time == 0.25);
    const auto numeric = gamma_return(reparam(space, [](std::span<const double>) { return 4.0; }), {0.3});
    CHECK(numeric.time == doctest::Approx(0.25).epsilon(1e-9));
    CHECK_THROWS_AS(reparam(space, [](std::span<const double> q) { return q[1] - 0.5; }), InvalidInput);
}

TEST_CASE("slow-down return times obey the ball bound")
{
    const SuspensionSpace space(BaseMap::golden_rotation());
    const std::vector<double> betas{1.0, 0.5, 0.25, 0.125};
    const double r = 0.25;
    const auto spec = SlowDownSpec::make(space, {0.5, 0.5}, betas, r);
    const SuspendedFlow flow = reparam(space, spec);
    CHECK(spec.alpha(space, std::vector<double>{0.5, 0.5}) == 0.0);
    CHECK(spec.alpha(space, std::vector<double>{0.1, 0.5}) == 1.0);
    for (int i = 2; i <= 4; ++i) {
        const double rho = r / (i + 1);
        for (double d : {0.3 * rho, 0.6 * rho, 0.9 * rho}) {
            const auto g = gamma_return(flow, {0.5 + d});
            REQUIRE_FALSE(g.infinite);
            CHECK(g.time >= 2.0 * std::sqrt(rho * rho - d * d) / betas[i - 1]);
        }
    }
    // the fiber through the centre never arrives
    CHECK(gamma_return(flow, {0.5}, 1e3).infinite);
}

TEST_CASE("occupation and averages along unit-speed orbits")
{
    const SuspensionSpace space(BaseMap::golden_rotation());
    const SuspendedFlow unit = suspend(BaseMap::golden_rotation());
    const sim::Region low = [](std::span<const double> q) { return q[1] < 0.2; };
    const auto o = occupation(unit, {0.1, 0.0}, 1000.0, low, sim::IntegratorOptions{1e-10});
    CHECK(o.J / o.t_total == doctest::Approx(0.2).epsilon(1e-6));

    const Observable one = [](std::span<const double>) { return 1.0; };
    const Observable height = [](std::span<const double> q) { return q[1]; };
    const auto h = suspended_average(space, one, height, 200.0, {0.3, 0.0});
    CHECK(h.value == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(h.weight == doctest::Approx(200.0).epsilon(1e-10));
    CHECK_FALSE(h.low_confidence);
    const Observable wave = [](std::span<const double> q) { return std::cos(kTwoPi * q[0]); };
    CHECK(std::abs(suspended_average(space, one, wave, 2000.0, {0.3, 0.0}).value) < 5e-3);
    CHECK(suspended_average(space, one, height, 10.0, {0.3, 0.0}).low_confidence);
}

TEST_CASE("ball frequencies")
{
    const BaseMap half = BaseMap::circle_rotation(0.5);
    CHECK(min_ball_frequency(half, 0.1, 1000) == 0.0);
    CHECK(min_ball_frequency(half, 0.6, 1000) == 1.0);
    const BaseMap g = BaseMap::golden_rotation();
    for (double eps : {0.05, 0.1, 0.2})
        CHECK(min_ball_frequency(g, eps, 2000, 200) == doctest::Approx(brute_min_frequency(g.angle(), eps, 2000, 200)));
    // equidistribution: frequency near 2 eps
    CHECK(min_ball_frequency(g, 0.1, 100000) == doctest::Approx(0.2).epsilon(0.02));
    const auto ladder = estimate_beta_ladder(g, 3, 4, 20000);
    REQUIRE(ladder.size() == 4);
    for (std::size_t k = 1; k < ladder.size(); ++k) CHECK(ladder[k] < ladder[k - 1]);
    CHECK_THROWS_AS(estimate_beta_ladder(g, 2, 4), InvalidInput);
    CHECK_THROWS_AS(min_ball_frequency(BaseMap::cat_map(), 0.1, 10), InvalidInput);
}

TEST_CASE("orbit sampling parallel equals serial")
{
    const SuspendedFlow flow = reparam(SuspensionSpace(BaseMap::cat_map()), 1.0);
    std::vector<State> seeds;
    for (int k = 0; k < 32; ++k) seeds.push_back({0.01 * k, 0.3, 0.1});
    const auto a = sample_orbits(flow, seeds, 4.0);
    const auto b = sample_orbits_serial(flow, seeds, 4.0);
    CHECK(a.data == b.data);
}

TEST_CASE("entropy of suspensions")
{
    AbramovParams p;
    p.seeds = 512;
    const auto id = abramov_check(BaseMap::identity(2), 1.0, p);
    CHECK(id.h_flow <= 0.05);
    CHECK(std::isnan(id.ratio));
    const auto cat = abramov_check(BaseMap::cat_map(), 1.0, p);
    CHECK(cat.h_flow > 0.5);
    CHECK(cat.ratio == doctest::Approx(1.0).epsilon(0.25));
    CHECK_THROWS_AS(abramov_check(BaseMap::golden_rotation(), 1.0, p), InvalidInput);
    CHECK_THROWS_AS(abramov_check(BaseMap::cat_map(), 8.0, p), InvalidInput);
}
