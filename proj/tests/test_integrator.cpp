#include <cmath>

#include "doctest.h"
#include "eqflow/integrator.hpp"

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

}  // namespace

TEST_CASE("harmonic oscillator against the exact rotation")
{
    const FlowField f = oscillator();
    for (double tol : {1e-6, 1e-9, 1e-12}) {
        const Trajectory tr = integrate(f, {1.0, 0.0}, 10.0, tol);
        CHECK(tr.stop == StopReason::completed);
        CHECK(tr.t_end() == 10.0);
        CHECK(tr.end()[0] == doctest::Approx(std::cos(10.0)).epsilon(200 * tol));
        CHECK(tr.end()[1] == doctest::Approx(std::sin(10.0)).epsilon(200 * tol));
        const State mid = tr.at(3.3);
        CHECK(std::abs(mid[0] - std::cos(3.3)) < 1e-3);
    }
}

TEST_CASE("stops land exactly")
{
    const FlowField f = oscillator();
    const std::vector<double> times{0.0, 0.25, 1.0, 2.5, 7.0};
    const auto xs = sample(f, {1.0, 0.0}, times, IntegratorOptions{1e-11});
    REQUIRE(xs.size() == times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK(xs[k][0] == doctest::Approx(std::cos(times[k])).epsilon(1e-8));
        CHECK(xs[k][1] == doctest::Approx(std::sin(times[k])).epsilon(1e-8));
    }
}

TEST_CASE("terminal event at a quarter turn")
{
    const FlowField f = oscillator();
    const Event e{[](std::span<const double> x) { return -x[0]; }, +1};
    const RunResult r = advance(f, {1.0, 0.0}, 0.0, 10.0, IntegratorOptions{1e-11}, {}, {}, &e);
    CHECK(r.stop == StopReason::event);
    CHECK(r.t == doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));
    CHECK(std::abs(r.x[0]) < 1e-9);
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("chart exit is located")
{
    const FlowField f(1, [](std::span<const double>, std::span<double> o) { o[0] = 1.0; }, FlowField::box(2.0));
    const Trajectory tr = integrate(f, {0.0}, 10.0, 1e-9);
    CHECK(tr.exited());
    CHECK(tr.t_end() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(tr.end()[0] <= 2.0);
}

TEST_CASE("stagnation stops the run")
{
    const FlowField f(1, [](std::span<const double> x, std::span<double> o) { o[0] = -x[0]; });
    IntegratorOptions opt{1e-9};
    opt.stagnation_speed = 1e-6;
    const RunResult r = advance(f, {1.0}, 0.0, 1e6, opt);
    CHECK(r.stop == StopReason::stagnated);
    CHECK(std::abs(r.x[0]) < 1e-5);
}

TEST_CASE("observer can stop the run")
{
    const FlowField f = oscillator();
    int calls = 0;
    const RunResult r = advance(f, {1.0, 0.0}, 0.0, 100.0, IntegratorOptions{}, [&](const Segment&) {
        return ++calls < 5;
    });
    CHECK(r.stop == StopReason::observer);
    CHECK(calls == 5);
}

TEST_CASE("input checks")
{
    CHECK_THROWS_AS(check_tol(1e-3), InvalidInput);
    CHECK_THROWS_AS(check_tol(1e-13), InvalidInput);
    CHECK_NOTHROW(check_tol(1e-9));
    const FlowField f = oscillator();
    CHECK_THROWS_AS(integrate(f, {1.0}, 1.0, 1e-9), InvalidInput);
    CHECK_THROWS_AS(integrate(f, {1.0, 0.0}, -1.0, 1e-9), InvalidInput);
}

TEST_CASE("csv rows")
{
    const Trajectory tr = integrate(oscillator(), {1.0, 0.0}, 1.0, 1e-9);
    const std::string csv = trajectory_csv(tr);
    CHECK(csv.rfind("t,x1,x2\n", 0) == 0);
}
