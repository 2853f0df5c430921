#include <cmath>
#include <random>

#include "doctest.h"
#include "eqflow/flowsim.hpp"
#include "json.hpp"

using namespace eqflow;
using namespace eqflow::sim;

namespace {

FlowField oscillator()
{
    return FlowField(2, [](std::span<const double> x, std::span<double> o) {
        o[0] = -x[1];
        o[1] = x[0];
    });
}

constexpr double pi = std::numbers::pi;

}  // namespace

TEST_CASE("detect_period on the oscillator")
{
    const auto p = detect_period(oscillator(), {0.7, 0.0}, 6.0, 1e-9);
    REQUIRE(p.found);
    CHECK(p.period == doctest::Approx(2 * pi).epsilon(1e-9));
    CHECK(p.closure < 1e-9);
    const auto fixed = detect_period(oscillator(), {0.0, 0.0}, 1.0, 1e-9);
    CHECK(fixed.fixed_point);
    CHECK(fixed.period == 0.0);
    CHECK_THROWS_AS(detect_period(oscillator(), {1.0, 0.0}, -1.0, 1e-9), InvalidInput);
}

TEST_CASE("first return to an oriented section")
{
    const FlowField f = oscillator();
    IntegratorOptions opt{1e-11};
    // crossing downward through x2 = 0
    const auto r = first_return(f, {1.0, 0.0}, SectionSpec::make({0.0, -1.0}, 0.0, +1), 10.0, opt);
    REQUIRE(r.found);
    CHECK(r.tau == doctest::Approx(pi).epsilon(1e-9));
    CHECK(r.point[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(std::abs(r.point[1]) < 1e-9);
    // the start point lies on the upward section and does not count
    const auto up = first_return(f, {1.0, 0.0}, SectionSpec::make({0.0, 1.0}, 0.0, +1), 10.0, opt);
    REQUIRE(up.found);
    CHECK(up.tau == doctest::Approx(2 * pi).epsilon(1e-9));
    CHECK_FALSE(first_return(f, {1.0, 0.0}, SectionSpec::make({0.0, 1.0}, 0.0, +1), 5.0, opt).found);
    CHECK(first_return(f, {0.0, 0.0}, SectionSpec::make({0.0, 1.0}, 0.0, +1), 5.0, opt).stagnated);
    CHECK_THROWS_AS(SectionSpec::make({0.0, 0.0}, 0.0, 1), InvalidInput);
    CHECK_THROWS_AS(SectionSpec::make({1.0, 0.0}, 0.0, 2), InvalidInput);
}

TEST_CASE("occupation of the upper half plane")
{
    const FlowField f = oscillator();
    const Region upper = [](std::span<const double> x) { return x[1] > 0.0; };
    const auto o = occupation(f, {1.0, 0.0}, 2 * pi, upper, IntegratorOptions{1e-11});
    CHECK(o.t_total == doctest::Approx(2 * pi).epsilon(1e-12));
    CHECK(o.J == doctest::Approx(pi).epsilon(1e-7));
    CHECK_FALSE(o.has_lambda);
    // twice the speed inside: half the time there
    const Ratio two = [](std::span<const double>) { return 2.0; };
    const auto l = occupation(f, {1.0, 0.0}, 2 * pi, upper, IntegratorOptions{1e-11}, two);
    REQUIRE(l.has_lambda);
    CHECK(l.lambda == doctest::Approx(1.5 * pi).epsilon(1e-7));
    const auto many = occupation(f, {1.0, 0.0}, 20 * pi, upper, IntegratorOptions{1e-11});
    CHECK(many.J == doctest::Approx(10 * pi).epsilon(1e-7));
}

TEST_CASE("separated sets on the zero field are sets of separated points")
{
    const FlowField z = FlowField::zero(1);
    std::vector<State> seeds;
    for (int k = 0; k <= 8; ++k) seeds.push_back({0.25 * k});
    const auto s = sample_orbits(z, seeds, 3.0);
    CHECK(s.times == 4);
    // greedy in order keeps 0, 0.5, 1, 1.5, 2
    const auto e = separated_entropy(s, 3.0, 0.5);
    CHECK(e.cardinality == 5);
    CHECK(e.h_estimate == doctest::Approx(std::log(5.0) / 3.0));
    CHECK(separated_entropy(s, 3.0, 0.3).cardinality == 5);
    CHECK(separated_entropy(s, 3.0, 0.2).cardinality == 9);
    CHECK(separated_entropy(s, 3.0, 10.0).cardinality == 1);
    CHECK_THROWS_AS(separated_entropy(s, 3.0, 0.0), InvalidInput);
}

TEST_CASE("separation grows along diverging orbits")
{
    // x' = x separates nearby seeds by e^t
    const FlowField f(1, [](std::span<const double> x, std::span<double> o) { o[0] = x[0]; });
    std::vector<State> seeds;
    for (int k = 0; k < 20; ++k) seeds.push_back({1e-3 * k});
    const auto s = sample_orbits(f, seeds, 4.0, IntegratorOptions{1e-11});
    // distances are 1e-3 |i - j| e^4 at the last sample
    const double gap = 1e-3 * std::exp(4.0);
    CHECK(separated_entropy(s, 4.0, 0.99 * gap).cardinality == 20);
    CHECK(separated_entropy(s, 4.0, 1.01 * gap).cardinality == 10);
}

TEST_CASE("parallel kernels agree with serial ones")
{
    const FlowField f = oscillator();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<State> seeds(64);
    for (auto& s : seeds) s = {u(rng), u(rng)};
    const auto a = sample_orbits(f, seeds, 5.0);
    const auto b = sample_orbits_serial(f, seeds, 5.0);
    CHECK(a.data == b.data);
    for (double eps : {0.05, 0.2, 0.6}) {
        CHECK(separated_entropy(a, 5.0, eps).cardinality == separated_entropy_serial(a, 5.0, eps).cardinality);
    }
    const std::vector<double> grid{0.05, 0.2};
    const auto g = separated_entropy_grid(a, 5.0, grid);
    CHECK(g[1].cardinality == separated_entropy(a, 5.0, 0.2).cardinality);
}

TEST_CASE("estimate records")
{
    SeparatedSetEstimate e{8.0, 0.1, 12, std::log(12.0) / 8.0, 100};
    const auto j = nlohmann::json::parse(estimate_jsonl(e));
    for (const char* k : {"t", "epsilon", "cardinality", "hEstimate", "sampleSize"}) CHECK(j.contains(k));
    CHECK(j["cardinality"] == 12);
}
