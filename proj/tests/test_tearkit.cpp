#include <cmath>
#include <random>

#include "doctest.h"
#include "eqflow/tearkit.hpp"
#include "json.hpp"

using namespace eqflow;
using namespace eqflow::tear;

namespace {

bool in_lens(double x1, double x2)
{
    return std::abs(x1) <= 1.0 && std::abs(x2) <= bump::gamma0(x1);
}

double dist(const std::array<double, 2>& a, const std::array<double, 2>& b)
{
    return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace

TEST_CASE("classification of the bands")
{
    const double g = bump::gamma0(0.0);
    auto c = classify(0.0, 0.5 * g);
    CHECK(c.region == Region::U1);
    CHECK(c.a == doctest::Approx(0.5));
    c = classify(0.0, g + 0.25);
    CHECK(c.region == Region::V1);
    CHECK(c.b == doctest::Approx(0.25));
    c = classify(0.0, 1.5);
    CHECK(c.region == Region::W1);
    CHECK(c.b == doctest::Approx((1.5 - 2 * g) / (1 - g)));
    CHECK(classify(0.0, 2.5).region == Region::outside);
    CHECK(classify(2.5, 0.0).region == Region::outside);
    CHECK(classify(1.5, 0.0).region == Region::U1);  // degenerate band: x2 = 0
    CHECK(classify(0.0, -0.5 * g).region == Region::U1);
    CHECK(region_name(Region::W1) == "W1");
}

TEST_CASE("Delta collapses U1 and straightens the sigma curves")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.99, 1.99), s(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        const double x1 = u(rng), a = s(rng), b = s(rng), bw = 1.0 + s(rng);
        const double g = bump::gamma0(x1);
        auto d = delta(x1, a * g);
        CHECK(d[0] == x1);
        CHECK(d[1] == 0.0);
        d = delta(x1, g + b);
        CHECK(d[1] == doctest::Approx(b).epsilon(1e-12));
        d = delta(x1, -(g + b));
        CHECK(d[1] == doctest::Approx(-b).epsilon(1e-12));
        d = delta(x1, 2 * g + bw * (1 - g));
        CHECK(d[1] == doctest::Approx(bw).epsilon(1e-12));
    }
    const auto far = delta(3.0, 0.7);
    CHECK(far[0] == 3.0);
    CHECK(far[1] == 0.7);
}

TEST_CASE("Z vanishes exactly on the closed lens")
{
    const TearField z;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0), v(-0.5, 0.5);
    for (int k = 0; k < 5000; ++k) {
        const double x1 = u(rng), x2 = k % 2 ? v(rng) : u(rng);
        const auto f = z.eval(x1, x2);
        const bool zero = f[0] == 0.0 && f[1] == 0.0;
        CHECK(zero == in_lens(x1, x2));
        CHECK(f[0] >= 0.0);
        CHECK(TearField(TearVariant::Z1).eval(x1, x2)[0] >= 0.0);
    }
    const auto p = z.eval(0.0, 0.0);
    CHECK(p[0] == 0.0);
    CHECK(p[1] == 0.0);
}

TEST_CASE("reference values of Z and the straight field")
{
    const TearField z;
    // outside the bands Z is horizontal with speed eta(x1, |x2|), 1 far out
    const auto out = z.eval(0.5, 3.0);
    CHECK(out[0] == 1.0);
    CHECK(out[1] == 0.0);
    const auto s = straight_eval(0.5, -3.0);
    CHECK(s[0] == out[0]);
    CHECK(s[1] == 0.0);
    // on sigma_b in V1 the slope follows gamma0'
    const double x1 = 0.4, b = 0.5;
    const auto v = z.eval(x1, bump::gamma0(x1) + b);
    CHECK(v[1] / v[0] == doctest::Approx(bump::gamma0_prime(x1)).epsilon(1e-12));
    CHECK(v[0] == doctest::Approx(b * b * b).epsilon(1e-12));
}

TEST_CASE("Z and Z1 are continuous across the band edges")
{
    for (TearVariant var : {TearVariant::Z, TearVariant::Z1}) {
        const TearField f(var);
        for (int i = -19; i <= 19; ++i) {
            const double x1 = 0.1 * i;
            const double g = bump::gamma0(x1);
            for (double edge : {g, g + 1.0, 2.0}) {
                const double h = 1e-9;
                CHECK(dist(f.eval(x1, edge - h), f.eval(x1, edge + h)) < 1e-6);
                CHECK(dist(f.eval(x1, -edge + h), f.eval(x1, -edge - h)) < 1e-6);
            }
        }
    }
}

TEST_CASE("mirror antisymmetry of the planar and rotated fields")
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    const TearField z;
    const RotatedField rot(z, 4);
    for (int k = 0; k < 1000; ++k) {
        const double x1 = u(rng), x2 = u(rng);
        const auto a = z.eval(x1, x2);
        const auto b = z.eval(-x1, x2);
        CHECK(b[0] == doctest::Approx(a[0]).epsilon(1e-13));
        CHECK(b[1] == doctest::Approx(-a[1]).epsilon(1e-13));
        const State p{x1, x2 / 2, u(rng) / 2, u(rng) / 2};
        State q = p;
        q[0] = -q[0];
        const State fp = rot.eval(p), fq = rot.eval(q);
        CHECK(fq[0] == doctest::Approx(fp[0]).epsilon(1e-13));
        for (int i = 1; i < 4; ++i) CHECK(fq[i] == doctest::Approx(-fp[i]).epsilon(1e-12));
    }
}

TEST_CASE("rotated field commutes with rotations fixing the axis")
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    const RotatedField rot(TearField(TearVariant::Z1), 5);
    for (int k = 0; k < 300; ++k) {
        // Householder reflection I - 2 v v^T with v orthogonal to e1
        State v{0.0, n(rng), n(rng), n(rng), n(rng)};
        const double nv = std::sqrt(v[1] * v[1] + v[2] * v[2] + v[3] * v[3] + v[4] * v[4]);
        for (double& c : v) c /= nv;
        auto reflect = [&](const State& x) {
            double d = 0.0;
            for (int i = 0; i < 5; ++i) d += v[i] * x[i];
            State y = x;
            for (int i = 0; i < 5; ++i) y[i] -= 2.0 * d * v[i];
            return y;
        };
        const State x{u(rng), u(rng), u(rng), u(rng), u(rng)};
        const State lhs = rot.eval(reflect(x));
        const State rhs = reflect(rot.eval(x));
        for (int i = 0; i < 5; ++i) CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-11).scale(1.0));
    }
    // on the plane x3 = x4 = x5 = 0 with x2 >= 0 it is the planar field
    const auto planar = TearField(TearVariant::Z1).eval(0.3, 0.2);
    const State r = rot.eval(State{0.3, 0.2, 0.0, 0.0, 0.0});
    CHECK(r[0] == doctest::Approx(planar[0]).epsilon(1e-14));
    CHECK(r[1] == doctest::Approx(planar[1]).epsilon(1e-14));
    CHECK_THROWS_AS(RotatedField(TearField(), 2), InvalidInput);
}

TEST_CASE("semiconjugacy on the three grids")
{
    const TearField z;
    for (Grid g : {Grid::axis, Grid::sigmaHalf, Grid::rhoHalf}) {
        const auto pts = grid_points(g, 41);
        REQUIRE(pts.size() == 41);
        const auto rep = semiconjugacy_residual(z, 5.0, pts);
        CHECK(rep.residual <= 1e-6);
        CHECK(rep.samples == 41);
        CHECK(rep.samples - rep.excluded >= 20);
    }
    CHECK(parse_grid("sigmaHalf") == Grid::sigmaHalf);
    CHECK_THROWS_AS(parse_grid("nope"), InvalidInput);
    CHECK(nlohmann::json::parse(residual_jsonl("axis", ResidualReport{0.0, 3, 1})).contains("residual"));
}

TEST_CASE("semiconjugacy of the rotated chart")
{
    const RotatedField rot(TearField(), 4);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<State> pts;
    for (const auto& p : grid_points(Grid::sigmaHalf, 21)) {
        State dir{n(rng), n(rng), n(rng)};
        const double nd = std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
        pts.push_back({p[0], p[1] * dir[0] / nd, p[1] * dir[1] / nd, p[1] * dir[2] / nd});
    }
    const auto rep = semiconjugacy_residual(rot, 5.0, pts);
    CHECK(rep.residual <= 1e-6);
    CHECK(rep.samples - rep.excluded >= 10);
}

TEST_CASE("crossing the chart: mirror image and time ratios")
{
    const RotatedField z(TearField(TearVariant::Z), 5), z1(TearField(TearVariant::Z1), 5);
    const auto samples = departure_samples(5, 30, 0.05, 2.5, 11);
    REQUIRE(samples.size() == 30);
    for (const auto& s : samples) CHECK(s[0] == -3.0);
    const auto m = mirror_check(z, samples);
    CHECK(m.valid == 30);
    CHECK(m.max_transverse_error < 1e-6);

    const auto same = return_ratio(z, z, samples);
    CHECK(same.min_ratio == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(same.max_ratio == doctest::Approx(1.0).epsilon(1e-9));

    const auto far = return_ratio(z, z1, departure_samples(5, 20, 2.1, 2.5, 12));
    CHECK(far.valid == 20);
    CHECK(far.min_ratio >= 0.9);
    CHECK(far.max_ratio <= 1.1);
    CHECK(nlohmann::json::parse(ratio_jsonl(far)).contains("minRatio"));
}

TEST_CASE("embedded disk field")
{
    const EmbeddedField e(disk::Variant::Z1, 6, 5);
    const State on{0.5, 0.0, 0.0, 0.0, 0.0};
    const State v = e.eval(on);
    CHECK(std::abs(v[0]) < 1e-15);
    CHECK(v[1] == doctest::Approx(0.125).epsilon(1e-14));
    for (int i = 2; i < 5; ++i) CHECK(v[i] == 0.0);
    CHECK(in_d1(on));

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1.4, 1.4);
    int checked = 0;
    while (checked < 500) {
        const State x{u(rng), u(rng), u(rng) / 3, u(rng) / 3, u(rng) / 3};
        if (!in_d2(x)) continue;
        ++checked;
        const State f = e.eval(x);
        if (in_d1(x)) continue;
        for (int i = 2; i < 5; ++i) CHECK(f[i] > 0.0);
    }
    // on the unit disk it is the disk field itself
    std::uniform_real_distribution<double> w(-0.7, 0.7);
    for (int k = 0; k < 200; ++k) {
        const double a = w(rng), b = w(rng);
        const State f = e.eval(State{a, b, 0.0, 0.0, 0.0});
        const auto d = e.disk().eval(a, b);
        CHECK(f[0] == d[0]);
        CHECK(f[1] == d[1]);
    }
    const EmbeddedField amb(disk::Variant::Z1, 6, 3, [](std::span<const double>, std::span<double> out) {
        out[0] = 7.0;
        out[1] = 8.0;
        out[2] = 9.0;
    });
    const State far = amb.eval(State{2.0, 0.0, 0.0});
    CHECK(far == State{7.0, 8.0, 9.0});
    CHECK(e.eval(State{2.0, 0.0, 0.0, 0.0, 0.0}) == State(5, 0.0));
    CHECK_THROWS_AS(EmbeddedField(disk::Variant::Z1, 6, 2), InvalidInput);
}

TEST_CASE("orbits off the unit disk do not come back")
{
    const EmbeddedField e(disk::Variant::Z1, 6, 4);
    const auto ff = e.flow_field();
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    int done = 0;
    while (done < 100) {
        const State x{u(rng), u(rng), u(rng) / 4, u(rng) / 4};
        if (!in_d2(x) || in_d1(x)) continue;
        ++done;
        const auto tr = sim::integrate(ff, x, 20.0, 1e-9);
        double prev = x[2] + x[3];
        bool monotone = true;
        for (const auto& s : tr.states) {
            const double h = s[2] + s[3];
            if (h < prev - 1e-12) monotone = false;
            prev = h;
        }
        CHECK(monotone);
        CHECK(sim::euclidean(tr.end(), x) > 0.0);
    }
}
