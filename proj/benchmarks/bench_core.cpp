// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "pinhole/forward.hpp"
#include "pinhole/recon.hpp"
#include "pinhole/sync.hpp"

using namespace pinhole;

namespace
{

// Scaled-down default geometry; the state range sets the rotation count T.
SystemConfig bench_system(std::size_t positions, double az_step_deg)
{
    SystemConfig cfg;
    cfg.grid = build_scene_grid(20.0, -30.0, 30.0, az_step_deg);
    cfg.rotation = make_rotation(positions);
    cfg.mask.blade_length_m = 0.03;
    cfg.mask.blade_width_m = 0.006;
    cfg.mask.plane_depth_m = 0.03;
    cfg.mask.axis_offset_m = 0.02;
    cfg.radar = make_radar(0.02);
    return cfg;
}

void BM_BuildForward(benchmark::State& state)
{
    const auto cfg = bench_system(static_cast<std::size_t>(state.range(0)), 1.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(build_forward(cfg));
}
BENCHMARK(BM_BuildForward)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

void BM_Factorize(benchmark::State& state)
{
    const auto model = build_forward(bench_system(static_cast<std::size_t>(state.range(0)), 0.5));
    for (auto _ : state)
        benchmark::DoNotOptimize(factorize(model));
}
BENCHMARK(BM_Factorize)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

void BM_Reconstruct(benchmark::State& state)
{
    const auto model = build_forward(bench_system(256, 0.5));
    const auto fact = factorize(model);
    const CVector y = model.B.col(60);
    ReconConfig rc;
    rc.sigma_max = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(reconstruct(fact, y, rc));
}
BENCHMARK(BM_Reconstruct)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMicrosecond);

void BM_DtwAlign(benchmark::State& state)
{
    const auto n = static_cast<Eigen::Index>(state.range(0));
    RotationSignature a, b;
    a.samples = RVector::LinSpaced(n, 0.0, 20.0).array().sin().matrix();
    b.samples = RVector::LinSpaced(n, 0.3, 20.3).array().sin().matrix();
    for (auto _ : state)
        benchmark::DoNotOptimize(dtw_align(a, b));
}
BENCHMARK(BM_DtwAlign)->RangeMultiplier(4)->Range(256, 4096)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
