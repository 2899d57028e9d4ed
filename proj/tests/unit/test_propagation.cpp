// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "pinhole/mask.hpp"
#include "pinhole/propagation.hpp"

using namespace pinhole;
using pinhole::test::small_system;

TEST(Propagation, GreensMagnitudeAndPhase)
{
    const Vec3 a(0, 0, 0), b(0.3, 0.4, 0.0);
    const cplx g = greens(a, b, 4e-3);
    EXPECT_NEAR(std::abs(g), 2.0, 1e-12);
    // 0.5 m is 125 wavelengths: phase is a whole number of turns.
    EXPECT_NEAR(std::arg(g), 0.0, 1e-9);
    const cplx h = greens(a, Vec3(0, 0, 0.501), 4e-3);
    EXPECT_NEAR(std::arg(h), pi / 2.0, 1e-9);
    EXPECT_PINHOLE_ERROR(greens(a, a, 4e-3), ErrorKind::singularity);
}

TEST(Propagation, RayleighSommerfeldFactor)
{
    const Vec3 src(0, 0, 0.1), on_axis(0, 0, 1.1), off_axis(1.0, 0, 1.1);
    const Vec3 n(0, 0, 1);
    const double lambda = 4e-3;
    const cplx w = rs_weight(src, on_axis, n, lambda);
    EXPECT_NEAR(std::abs(w - greens(src, on_axis, lambda) / cplx(0.0, lambda)), 0.0, 1e-12);

    const cplx tilted = rs_weight(src, off_axis, n, lambda);
    const cplx flat = rs_weight(src, off_axis, n, lambda, false);
    EXPECT_NEAR(std::abs(tilted / flat), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Propagation, CosinePowerHitsHalfPower)
{
    for (double half : {10.0, 20.0, 50.0, 80.0})
    {
        const double p = cosine_power_exponent(half);
        EXPECT_NEAR(std::pow(std::cos(deg2rad(half)), p), std::sqrt(0.5), 1e-12);
    }
    EXPECT_PINHOLE_ERROR(cosine_power_exponent(0.0), ErrorKind::parameter);
    EXPECT_PINHOLE_ERROR(cosine_power_exponent(90.0), ErrorKind::parameter);
}

TEST(Propagation, PatternShapes)
{
    const AntennaPattern p(50.0, 20.0);
    EXPECT_DOUBLE_EQ(p.azimuth_shape(0.0), 1.0);
    EXPECT_NEAR(p.azimuth_shape(deg2rad(50.0)), std::sqrt(0.5), 1e-12);
    EXPECT_NEAR(p.elevation_shape(deg2rad(-20.0)), std::sqrt(0.5), 1e-12);
    EXPECT_DOUBLE_EQ(p.azimuth_shape(deg2rad(120.0)), 0.0);
    const auto iso = AntennaPattern::isotropic();
    EXPECT_DOUBLE_EQ(pattern_weight(iso, Vec3(1, 1, -1)), 1.0);
    // Separable: a boresight-aligned direction sees both axes at unity.
    EXPECT_DOUBLE_EQ(pattern_weight(p, Vec3(0, 0, 2)), 1.0);
}

TEST(Propagation, DirectionAngles)
{
    const auto [az, el] = direction_angles(Vec3(1, 0, 1));
    EXPECT_NEAR(az, pi / 4.0, 1e-15);
    EXPECT_NEAR(el, 0.0, 1e-15);
    const auto [az2, el2] = direction_angles(Vec3(0, 1, 1));
    EXPECT_NEAR(az2, 0.0, 1e-15);
    EXPECT_NEAR(el2, pi / 4.0, 1e-15);
}

TEST(Propagation, TabulatedPatternInterpolates)
{
    AntennaPattern p;
    p.set_azimuth_table({{0.0, 1.0}, {10.0, 0.5}, {20.0, 0.0}});
    EXPECT_NEAR(p.azimuth_shape(deg2rad(5.0)), 0.75, 1e-12);
    EXPECT_NEAR(p.azimuth_shape(deg2rad(-15.0)), 0.25, 1e-12); // symmetric table
    EXPECT_DOUBLE_EQ(p.azimuth_shape(deg2rad(40.0)), 0.0);    // clamps
    EXPECT_PINHOLE_ERROR(p.set_azimuth_table({{0.0, 1.0}}), ErrorKind::parameter);
    EXPECT_PINHOLE_ERROR(p.set_azimuth_table({{0.0, 1.0}, {0.0, 0.5}}), ErrorKind::parameter);
    EXPECT_PINHOLE_ERROR(p.set_azimuth_table({{0.0, 1.0}, {5.0, -0.5}}), ErrorKind::parameter);
}

TEST(Propagation, PatternFile)
{
    pinhole::test::TempDir dir;
    {
        std::ofstream out(dir / "az.txt");
        out << "# angle amp\n-30 0.2\n\n0 1\n30 0.2\n";
    }
    const auto table = load_pattern_table(dir / "az.txt");
    ASSERT_EQ(table.size(), 3u);
    EXPECT_DOUBLE_EQ(table[0].first, -30.0);
    {
        std::ofstream out(dir / "bad.txt");
        out << "0 1\nzero one\n";
    }
    EXPECT_PINHOLE_ERROR(load_pattern_table(dir / "bad.txt"), ErrorKind::format);
    EXPECT_PINHOLE_ERROR(load_pattern_table(dir / "missing.txt"), ErrorKind::io);
}

// Direct triple sum over rotation, scene and mask-plane samples.
static CMatrix oneway_oracle(const SystemConfig& cfg, const MaskPlaneSampling& plane, const RMatrix& transmission,
                             const Vec3& antenna)
{
    const AntennaPattern pattern = AntennaPattern::from_radar(cfg.radar);
    const double lambda = cfg.radar.wavelength_m;
    const Vec3 n(0, 0, 1);
    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(cfg.rotation.size()),
                                static_cast<Eigen::Index>(cfg.grid.size()));
    for (std::size_t m = 0; m < plane.size(); ++m)
    {
        const Vec3& q = plane.samples[m];
        const cplx illum = pattern_weight(pattern, q - antenna) * greens(antenna, q, lambda) * plane.cell_area();
        for (std::size_t j = 0; j < cfg.grid.size(); ++j)
        {
            const cplx k = illum * rs_weight(q, cfg.grid.points[j], n, lambda);
            for (Eigen::Index t = 0; t < out.rows(); ++t)
                out(t, static_cast<Eigen::Index>(j)) += transmission(t, static_cast<Eigen::Index>(m)) * k;
        }
    }
    return out;
}

TEST(Propagation, AssemblyMatchesDirectSum)
{
    for (auto mode : {MaskMode::inverse_pinhole, MaskMode::regular_pinhole})
    {
        const auto cfg = small_system(mode);
        const auto plane = make_plane_sampling(cfg.radar, cfg.mask);
        const auto tr = make_transmission(cfg.mask, cfg.rotation, plane);
        const auto got = assemble_oneway(cfg.radar, cfg.grid, cfg.mask, cfg.rotation, plane, AntennaEnd::rx, tr);
        const CMatrix want = oneway_oracle(cfg, plane, tr.dense(), cfg.radar.rx_position);
        EXPECT_EQ(got.direction, PropagationDirection::scene_to_rx);
        EXPECT_LT((got.entries - want).norm() / want.norm(), 1e-10);
    }
}

TEST(Propagation, ManyMatchesSingle)
{
    const auto cfg = small_system();
    const auto plane = make_plane_sampling(cfg.radar, cfg.mask);
    const auto tr = make_transmission(cfg.mask, cfg.rotation, plane);
    const auto pattern = AntennaPattern::from_radar(cfg.radar);
    const auto both = assemble_oneway_many({cfg.radar.tx_position, cfg.radar.rx_position}, cfg.radar.wavelength_m,
                                           cfg.grid, cfg.rotation, plane, tr, pattern, true);
    const auto tx = assemble_oneway(cfg.radar, cfg.grid, cfg.mask, cfg.rotation, plane, AntennaEnd::tx, tr);
    ASSERT_EQ(both.size(), 2u);
    EXPECT_LT((both[0] - tx.entries).norm(), 1e-12 * tx.entries.norm());
}

TEST(Propagation, OpenMaskRowsAreIdentical)
{
    const auto cfg = small_system();
    const auto plane = make_plane_sampling(cfg.radar, cfg.mask);
    const auto open = open_mask(cfg.rotation, plane);
    const auto f = assemble_oneway(cfg.radar, cfg.grid, cfg.mask, cfg.rotation, plane, AntennaEnd::tx, open);
    for (Eigen::Index t = 1; t < f.rows(); ++t)
        EXPECT_LT((f.entries.row(t) - f.entries.row(0)).norm(), 1e-12 * f.entries.row(0).norm());
}

TEST(Propagation, ShapeChecks)
{
    const auto cfg = small_system();
    const auto plane = make_plane_sampling(cfg.radar, cfg.mask);
    const auto wrong_rows = open_mask(make_rotation(7), plane);
    EXPECT_PINHOLE_ERROR(assemble_oneway(cfg.radar, cfg.grid, cfg.mask, cfg.rotation, plane, AntennaEnd::tx,
                                         wrong_rows),
                         ErrorKind::shape);
}
