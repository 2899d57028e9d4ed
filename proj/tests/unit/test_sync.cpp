// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "pinhole/sync.hpp"

using namespace pinhole;
using pinhole::test::small_system;

namespace
{

RotationSignature sig(std::vector<double> v)
{
    RotationSignature s;
    s.samples = Eigen::Map<RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
    s.nominal_period_samples = v.size();
    return s;
}

RotationSignature random_sig(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> v(n);
    for (auto& x : v)
        x = u(rng);
    return sig(v);
}

void expect_valid_path(const WarpPath& p, std::size_t n, std::size_t m)
{
    ASSERT_FALSE(p.pairs.empty());
    EXPECT_EQ(p.pairs.front(), (std::pair<std::size_t, std::size_t>{0, 0}));
    EXPECT_EQ(p.pairs.back(), (std::pair<std::size_t, std::size_t>{n - 1, m - 1}));
    for (std::size_t k = 1; k < p.pairs.size(); ++k)
    {
        const auto di = p.pairs[k].first - p.pairs[k - 1].first;
        const auto dj = p.pairs[k].second - p.pairs[k - 1].second;
        EXPECT_TRUE((di == 1 && dj == 0) || (di == 0 && dj == 1) || (di == 1 && dj == 1));
    }
}

// Classic unbanded DTW, used as the oracle.
double dtw_oracle(const RVector& a, const RVector& b)
{
    const auto n = a.size(), m = b.size();
    RMatrix D = RMatrix::Constant(n + 1, m + 1, std::numeric_limits<double>::infinity());
    D(0, 0) = 0;
    for (Eigen::Index i = 1; i <= n; ++i)
        for (Eigen::Index j = 1; j <= m; ++j)
            D(i, j) = std::pow(a[i - 1] - b[j - 1], 2) + std::min({D(i - 1, j), D(i, j - 1), D(i - 1, j - 1)});
    return D(n, m);
}

} // namespace

TEST(Sync, IdentityIsDiagonal)
{
    const auto a = random_sig(50, 1);
    const auto p = dtw_align(a, a);
    EXPECT_EQ(p.cost, 0.0);
    ASSERT_EQ(p.pairs.size(), 50u);
    for (std::size_t k = 0; k < 50; ++k)
        EXPECT_EQ(p.pairs[k], (std::pair<std::size_t, std::size_t>{k, k}));
}

TEST(Sync, DuplicatedSamplesMapTwice)
{
    const auto a = random_sig(30, 2);
    std::vector<double> dup;
    for (Eigen::Index i = 0; i < a.samples.size(); ++i)
    {
        dup.push_back(a.samples[i]);
        dup.push_back(a.samples[i]);
    }
    const auto p = dtw_align(a, sig(dup), DtwOptions{1.0});
    EXPECT_EQ(p.cost, 0.0);
    expect_valid_path(p, 30, 60);
    std::vector<int> hits(30, 0);
    for (const auto& [i, j] : p.pairs)
    {
        ++hits[i];
        EXPECT_EQ(j / 2, i);
    }
    for (int h : hits)
        EXPECT_EQ(h, 2);
}

TEST(Sync, BandInfeasibleLengths)
{
    const auto a = random_sig(100, 3);
    EXPECT_PINHOLE_ERROR(dtw_align(a, random_sig(112, 4)), ErrorKind::alignment);
    EXPECT_NO_THROW(dtw_align(a, random_sig(110, 4)));
    EXPECT_PINHOLE_ERROR(dtw_align(a, sig({})), ErrorKind::alignment);
}

TEST(Sync, CostMatchesUnbandedOracle)
{
    for (std::uint64_t s = 0; s < 10; ++s)
    {
        const auto a = random_sig(40, 10 + s), b = random_sig(37, 20 + s);
        EXPECT_NEAR(dtw_cost(a.samples, b.samples, DtwOptions{1.0}), dtw_oracle(a.samples, b.samples), 1e-12);
    }
}

TEST(Sync, CostIsSymmetric)
{
    // The band width follows the template length, so symmetry needs equal lengths or no band.
    for (std::uint64_t s = 0; s < 10; ++s)
    {
        const auto a = random_sig(64, 30 + s), b = random_sig(64, 40 + s), c = random_sig(57, 50 + s);
        EXPECT_NEAR(dtw_cost(a.samples, b.samples), dtw_cost(b.samples, a.samples), 1e-12);
        EXPECT_NEAR(dtw_cost(a.samples, c.samples, DtwOptions{1.0}), dtw_cost(c.samples, a.samples, DtwOptions{1.0}),
                    1e-12);
    }
}

TEST(Sync, PathIsMonotoneWithValidSteps)
{
    const auto a = random_sig(80, 5), b = random_sig(85, 6);
    const auto p = dtw_align(a, b);
    expect_valid_path(p, 80, 85);
    EXPECT_NEAR(p.cost, dtw_cost(a.samples, b.samples), 1e-12);
}

TEST(Sync, ConstantSpeedSignatureIsPeriodic)
{
    const auto cfg = small_system();
    const std::size_t T = 60;
    const std::vector<double> speed(2 * T, 600.0);
    const auto s = synth_signature(cfg.radar, cfg.mask, speed, T);
    ASSERT_EQ(s.samples.size(), static_cast<Eigen::Index>(2 * T));
    const RVector first = s.samples.head(T), second = s.samples.tail(T);
    const double corr = first.dot(second) / (first.norm() * second.norm());
    EXPECT_GT(corr, 0.99);
}

TEST(Sync, TwinBladeHalvesThePeriod)
{
    auto cfg = small_system();
    cfg.mask.blade_count = 2;
    const std::size_t T = 60;
    const auto s = synth_signature(cfg.radar, cfg.mask, make_rotation(T));
    const RVector a = s.samples.head(T / 2), b = s.samples.tail(T / 2);
    // Equal up to lattice points lying exactly on a blade edge.
    EXPECT_GT(a.dot(b) / (a.norm() * b.norm()), 0.9999);
}

TEST(Sync, SpeedRampShortensCycles)
{
    const std::size_t T = 100;
    std::vector<double> speed(3 * T);
    for (std::size_t s = 0; s < speed.size(); ++s)
        speed[s] = 600.0 * (1.0 + 0.1 * double(s) / double(speed.size()));
    const auto rot = warped_rotation(speed, T);
    // Sample index at which each whole turn completes.
    std::vector<std::size_t> turns;
    for (std::size_t t = 1; t < rot.size(); ++t)
        if (std::floor(rot.angles_rad[t] / two_pi) > std::floor(rot.angles_rad[t - 1] / two_pi))
            turns.push_back(t);
    ASSERT_GE(turns.size(), 3u);
    EXPECT_LT(turns[2] - turns[1], turns[1] - turns[0] + 1);
    EXPECT_LT(turns[2] - turns[1], T);
    EXPECT_PINHOLE_ERROR(warped_rotation({600.0, -1.0}, T), ErrorKind::parameter);
}

TEST(Sync, WobbleRecoveredWithinOneSample)
{
    SystemConfig cfg;
    const std::size_t T = cfg.rotation.size();
    std::vector<double> speed(T);
    for (std::size_t s = 0; s < T; ++s)
        speed[s] = 600.0 * (1.0 + 0.05 * std::sin(two_pi * double(s) / double(T)));
    const auto warped = warped_rotation(speed, T);
    const auto templ = log_compress(synth_signature(cfg.radar, cfg.mask, cfg.rotation));
    const auto observed = log_compress(synth_signature(cfg.radar, cfg.mask, warped));
    const auto pos = warp_positions(dtw_align(templ, observed), T);
    std::vector<double> err;
    const auto& a = warped.angles_rad;
    for (std::size_t i = 1; i + 1 < T; ++i)
    {
        const double angle = two_pi * double(i) / double(T);
        const auto hi = static_cast<std::size_t>(std::upper_bound(a.begin(), a.end(), angle) - a.begin());
        if (hi == 0 || hi >= T)
            continue;
        const double truth = double(hi - 1) + (angle - a[hi - 1]) / (a[hi] - a[hi - 1]);
        err.push_back(std::abs(pos[i] - truth));
    }
    std::nth_element(err.begin(), err.begin() + err.size() / 2, err.end());
    EXPECT_LT(err[err.size() / 2], 1.0);
}

TEST(Sync, WarpPositionsSpreadPlateaus)
{
    WarpPath p;
    // Template indices 1..3 all map to observed 1.
    p.pairs = {{0, 0}, {1, 1}, {2, 1}, {3, 1}, {4, 2}};
    const auto pos = warp_positions(p, 5);
    EXPECT_DOUBLE_EQ(pos[0], 0.0);
    EXPECT_DOUBLE_EQ(pos[2], 1.0);
    EXPECT_LT(pos[1], pos[2]);
    EXPECT_GT(pos[3], pos[2]);
    EXPECT_DOUBLE_EQ(pos[4], 2.0);

    WarpPath gap;
    gap.pairs = {{0, 0}, {2, 2}};
    EXPECT_PINHOLE_ERROR(warp_positions(gap, 3), ErrorKind::interpolation);
    WarpPath late;
    late.pairs = {{0, 1}};
    EXPECT_PINHOLE_ERROR(warp_positions(late, 1), ErrorKind::interpolation);
}

TEST(Sync, WarpSmoothingKeepsLinearMaps)
{
    WarpPath p;
    for (std::size_t k = 0; k < 40; ++k)
        p.pairs.emplace_back(k, k);
    const auto pos = warp_positions(p, 40, 9);
    for (std::size_t k = 0; k < 40; ++k)
        EXPECT_NEAR(pos[k], double(k), 1e-12);
}

TEST(Sync, ResampleIdentityAndHalfSteps)
{
    MeasurementSet ms;
    ms.y = pinhole::test::random_complex(20, 1, 3);
    WarpPath id;
    for (std::size_t k = 0; k < 20; ++k)
        id.pairs.emplace_back(k, k);
    EXPECT_EQ((resample_to_uniform(ms, id).y - ms.y).norm(), 0.0);

    // Observed runs at double rate: template k sits at observed 2k.
    MeasurementSet fast;
    fast.y = CVector(9);
    for (int j = 0; j < 9; ++j)
        fast.y[j] = cplx(j, -j);
    WarpPath dbl;
    dbl.pairs = {{0, 0}, {1, 1}, {1, 2}, {2, 3}, {2, 4}, {3, 5}, {3, 6}, {4, 7}, {4, 8}};
    const auto out = resample_to_uniform(fast, dbl);
    ASSERT_EQ(out.y.size(), 5);
    EXPECT_NEAR(out.y[2].real(), 3.5, 1e-12);
    EXPECT_PINHOLE_ERROR(resample_to_uniform(ms, dbl), ErrorKind::interpolation);
}

TEST(Sync, SignatureCsv)
{
    pinhole::test::TempDir dir;
    {
        std::ofstream out(dir / "sig.csv");
        out << "# near-range energy\n1.0\n0.5,\n\n2.0\n";
    }
    const auto s = load_signature_csv(dir / "sig.csv", 3);
    ASSERT_EQ(s.samples.size(), 3);
    EXPECT_DOUBLE_EQ(s.samples[1], 0.5);
    {
        std::ofstream out(dir / "neg.csv");
        out << "1.0\n-2\n";
    }
    EXPECT_PINHOLE_ERROR(load_signature_csv(dir / "neg.csv", 3), ErrorKind::format);
    EXPECT_PINHOLE_ERROR(load_signature_csv(dir / "none.csv", 3), ErrorKind::io);
}

TEST(Sync, LogCompressKeepsOrder)
{
    const auto s = sig({0.0, 1.0, 100.0, 10.0});
    const auto c = log_compress(s, 0.01);
    EXPECT_DOUBLE_EQ(c.samples[0], 0.0);
    EXPECT_NEAR(c.samples[2], std::log(101.0), 1e-12);
    EXPECT_LT(c.samples[1], c.samples[3]);
    EXPECT_PINHOLE_ERROR(log_compress(s, 0.0), ErrorKind::parameter);
}
