// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <Eigen/SVD>

#include "helpers.hpp"
#include "pinhole/recon.hpp"

using namespace pinhole;
using pinhole::test::random_complex;

TEST(Recon, IdentityHasUnitSpectrum)
{
    const auto f = factorize(CMatrix::Identity(6, 6));
    EXPECT_LT((f.S - RVector::Ones(6)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Recon, RankOneOuterProduct)
{
    const CVector u = random_complex(9, 1, 1);
    const CVector v = random_complex(5, 1, 2);
    const auto f = factorize(u * v.adjoint());
    EXPECT_NEAR(f.S[0], u.norm() * v.norm(), 1e-12 * f.S[0]);
    EXPECT_LT(f.S.tail(4).maxCoeff(), 1e-12 * f.S[0]);
}

TEST(Recon, MatchesJacobiOracle)
{
    for (auto [r, c] : {std::pair{30, 20}, std::pair{12, 25}})
    {
        const CMatrix B = random_complex(r, c, 7);
        const auto f = factorize(B);
        Eigen::JacobiSVD<CMatrix> ref(B);
        ASSERT_EQ(f.S.size(), ref.singularValues().size());
        EXPECT_LT((f.S - ref.singularValues()).cwiseAbs().maxCoeff(), 1e-12 * f.S[0]);
        // Factors reproduce B and are orthonormal.
        const CMatrix rebuilt = f.U * f.S.asDiagonal() * f.V.adjoint();
        EXPECT_LT((rebuilt - B).norm(), 1e-12 * B.norm());
        const auto k = f.S.size();
        EXPECT_LT((f.U.adjoint() * f.U - CMatrix::Identity(k, k)).norm(), 1e-12);
        EXPECT_LT((f.V.adjoint() * f.V - CMatrix::Identity(k, k)).norm(), 1e-12);
        for (Eigen::Index i = 1; i < k; ++i)
            EXPECT_GE(f.S[i - 1], f.S[i]);
    }
}

TEST(Recon, RejectsBadMatrices)
{
    EXPECT_PINHOLE_ERROR(factorize(CMatrix(0, 3)), ErrorKind::shape);
    CMatrix bad = CMatrix::Ones(3, 3);
    bad(1, 1) = cplx(std::nan(""), 0.0);
    EXPECT_PINHOLE_ERROR(factorize(bad), ErrorKind::numeric);
}

TEST(Recon, FullRankInversionIsExact)
{
    const CMatrix B = random_complex(40, 16, 3);
    const CVector x = random_complex(16, 1, 4);
    const auto f = factorize(B);
    ReconConfig cfg;
    cfg.sigma_max = 16;
    const auto img = reconstruct(f, B * x, cfg);
    EXPECT_LT((img.amplitude - x).norm() / x.norm(), 1e-12);
    EXPECT_EQ(img.terms, 16u);
    EXPECT_LT((img.intensity - x.cwiseAbs()).norm(), 1e-12);
}

TEST(Recon, TruncationTerms)
{
    const CMatrix B = random_complex(20, 10, 5);
    const auto f = factorize(B);
    ReconConfig cfg;
    cfg.sigma_max = 0;
    EXPECT_PINHOLE_ERROR(truncation_terms(f, cfg), ErrorKind::parameter);
    cfg.sigma_max = 11;
    EXPECT_PINHOLE_ERROR(truncation_terms(f, cfg), ErrorKind::parameter);
    cfg.sigma_max = 4;
    EXPECT_EQ(truncation_terms(f, cfg), 4u);

    ReconConfig rel;
    rel.truncation = Truncation::relative;
    rel.relative_threshold = 0.999999;
    EXPECT_EQ(truncation_terms(f, rel), 1u);
    rel.relative_threshold = 1e-9;
    EXPECT_EQ(truncation_terms(f, rel), 10u);
    rel.relative_threshold = 0.0;
    EXPECT_PINHOLE_ERROR(truncation_terms(f, rel), ErrorKind::parameter);
}

TEST(Recon, RankDeficiencyIsReported)
{
    const CVector u = random_complex(8, 1, 1);
    const CVector v = random_complex(6, 1, 2);
    const auto f = factorize(u * v.adjoint());
    ReconConfig cfg;
    cfg.sigma_max = 3;
    EXPECT_PINHOLE_ERROR(truncation_terms(f, cfg), ErrorKind::rank_deficiency);
}

TEST(Recon, NoiselessErrorNonIncreasingInK)
{
    const CMatrix B = random_complex(50, 24, 11);
    const CVector x = random_complex(24, 1, 12);
    const auto f = factorize(B);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= 24; ++k)
    {
        ReconConfig cfg;
        cfg.sigma_max = k;
        const double err = (reconstruct(f, B * x, cfg).amplitude - x).norm();
        EXPECT_LE(err, prev + 1e-12);
        prev = err;
    }
}

TEST(Recon, ScalingEquivariance)
{
    const CMatrix B = random_complex(30, 12, 13);
    const CVector y = random_complex(30, 1, 14);
    const auto f = factorize(B);
    ReconConfig cfg;
    cfg.sigma_max = 7;
    const cplx alpha(0.3, -2.0);
    const CVector a = reconstruct(f, alpha * y, cfg).amplitude;
    const CVector b = alpha * reconstruct(f, y, cfg).amplitude;
    EXPECT_LT((a - b).norm(), 1e-12 * b.norm());
}

TEST(Recon, NormalizedOutputPeaksAtOne)
{
    const CMatrix B = random_complex(30, 12, 15);
    const auto f = factorize(B);
    ReconConfig cfg;
    cfg.sigma_max = 12;
    cfg.normalize_output = true;
    const auto img = reconstruct(f, B * random_complex(12, 1, 16), cfg, 4);
    EXPECT_NEAR(img.intensity.maxCoeff(), 1.0, 1e-15);
    const RMatrix im = img.image();
    EXPECT_EQ(im.rows(), 3);
    EXPECT_EQ(im.cols(), 4);
    EXPECT_DOUBLE_EQ(im(1, 2), img.intensity[6]);
}

TEST(Recon, ShapeMismatch)
{
    const auto f = factorize(random_complex(10, 4, 1));
    ReconConfig cfg;
    cfg.sigma_max = 2;
    EXPECT_PINHOLE_ERROR(reconstruct(f, CVector::Zero(9), cfg), ErrorKind::shape);
    EXPECT_PINHOLE_ERROR(background_subtract(CVector::Zero(3), CVector::Zero(4)), ErrorKind::shape);
}

TEST(Recon, BackgroundSubtraction)
{
    const CVector a = random_complex(5, 1, 1), b = random_complex(5, 1, 2);
    EXPECT_EQ((background_subtract(a, b) - (a - b)).norm(), 0.0);
}

TEST(Recon, DisplayNormalizeClampsFloor)
{
    RVector v(4);
    v << 0.0, 0.5, 2.0, 0.1;
    const RVector d = display_normalize(v);
    EXPECT_DOUBLE_EQ(d[0], 0.1);
    EXPECT_DOUBLE_EQ(d[1], 0.25);
    EXPECT_DOUBLE_EQ(d[2], 1.0);
    EXPECT_DOUBLE_EQ(d[3], 0.1);
}

TEST(Recon, LocalMaxima)
{
    RVector v(9);
    v << 3, 1, 2, 2, 1, 0, 4, 4, 5;
    const auto peaks = local_maxima(v);
    // Endpoint, plateau centre and the right endpoint.
    ASSERT_EQ(peaks.size(), 3u);
    EXPECT_EQ(peaks[0], 0u);
    EXPECT_TRUE(peaks[1] == 2u || peaks[1] == 3u);
    EXPECT_EQ(peaks[2], 8u);
}

namespace
{

RVector two_gaussians(const std::vector<double>& az, double a, double b, double sigma)
{
    RVector r(static_cast<Eigen::Index>(az.size()));
    for (std::size_t i = 0; i < az.size(); ++i)
        r[static_cast<Eigen::Index>(i)] = std::exp(-0.5 * std::pow((az[i] - a) / sigma, 2)) +
                                          std::exp(-0.5 * std::pow((az[i] - b) / sigma, 2));
    return r;
}

} // namespace

TEST(Recon, ResolveTwo)
{
    std::vector<double> az;
    for (int i = -200; i <= 200; ++i)
        az.push_back(0.01 * i);
    const auto far = resolve_two(two_gaussians(az, -0.5, 0.5, 0.2), az, -0.5, 0.5);
    EXPECT_TRUE(far.resolved);
    EXPECT_NEAR(az[far.peak_a], -0.5, 0.02);
    EXPECT_NEAR(az[far.peak_b], 0.5, 0.02);
    EXPECT_NEAR(az[far.valley], 0.0, 0.02);
    const auto near = resolve_two(two_gaussians(az, -0.15, 0.15, 0.2), az, -0.15, 0.15);
    EXPECT_FALSE(near.resolved);
    EXPECT_PINHOLE_ERROR(resolve_two(two_gaussians(az, 0, 0, 1), az, 0.1, 0.1), ErrorKind::parameter);
}

TEST(Recon, ResolveTwoDipThresholdIsInPower)
{
    // Valley amplitude 0.75 of the peaks: 0.5625 in power, above the half-power line.
    RVector r(5);
    r << 0.2, 1.0, 0.75, 1.0, 0.2;
    const std::vector<double> az{-2, -1, 0, 1, 2};
    EXPECT_FALSE(resolve_two(r, az, -1, 1).resolved);
    r[2] = 0.7;
    EXPECT_TRUE(resolve_two(r, az, -1, 1).resolved);
}
