// Serial against OpenMP timings for the parallel kernels.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include "eqflow/diskflow.hpp"
#include "eqflow/flowsim.hpp"
#include "eqflow/suspension.hpp"

using namespace eqflow;

namespace {

double seconds(const std::function<void()>& f, int reps)
{
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void report(const char* name, double serial, double parallel)
{
    std::printf("%-28s serial %10.4f ms  parallel %10.4f ms  speedup %5.2f\n", name, 1e3 * serial, 1e3 * parallel,
                serial / parallel);
}

}  // namespace

int main()
{
    std::printf("threads: %d\n", omp_get_max_threads());

    const disk::DiskField z1(disk::Variant::Z1, disk::RadiiLadder::build(8));
    std::vector<disk::LogReal> ts;
    for (int n = 2; n <= 8; ++n) ts.push_back(disk::canonical_time(disk::Variant::Z1, n));
    report("ep_curve (Z1, n=2..8)", seconds([&] { disk::ep_curve_serial(z1, ts); }, 200),
           seconds([&] { disk::ep_curve(z1, ts); }, 200));

    const disk::DiskField z0(disk::Variant::Z0, disk::RadiiLadder::build(4));
    const sim::FlowField f0 = disk::flow_field(z0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    std::vector<State> seeds(256);
    for (auto& s : seeds) s = {u(rng), u(rng)};
    report("sample_orbits (Z0, 256 x 8)", seconds([&] { sim::sample_orbits_serial(f0, seeds, 8.0); }, 3),
           seconds([&] { sim::sample_orbits(f0, seeds, 8.0); }, 3));

    const auto cat = susp::BaseMap::cat_map();
    const susp::SuspensionSpace space(cat);
    const auto flow = susp::reparam(space, 1.0);
    std::vector<State> sseeds(2048);
    for (std::size_t k = 0; k < sseeds.size(); ++k) sseeds[k] = {0.1 + 0.05 * k / 2048.0, 0.3, 0.0};
    const auto samples = susp::sample_orbits(flow, sseeds, 8.0);
    const sim::Metric metric = [&](std::span<const double> a, std::span<const double> b) {
        return space.distance(a, b);
    };
    report("separated set (2048 orbits)", seconds([&] { sim::separated_entropy_serial(samples, 8.0, 0.05, metric); }, 2),
           seconds([&] { sim::separated_entropy(samples, 8.0, 0.05, metric); }, 2));
    return 0;
}
