// SPDX-License-Identifier: Apache-2.0
#include "pinhole/recon.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "pinhole/error.hpp"

namespace pinhole
{

SvdFactorization factorize(const ForwardModel& model)
{
    return factorize(model.B, model.fingerprint);
}

SvdFactorization factorize(const Eigen::Ref<const CMatrix>& B, std::uint64_t fingerprint)
{
    require(B.rows() > 0 && B.cols() > 0, ErrorKind::shape, "cannot factorize an empty matrix");
    require(B.allFinite(), ErrorKind::numeric, "matrix has non-finite entries");

    const auto m = static_cast<lapack_int>(B.rows());
    const auto n = static_cast<lapack_int>(B.cols());
    const lapack_int k = std::min(m, n);

    CMatrix a = B; // zgesdd overwrites its input
    SvdFactorization f;
    f.fingerprint = fingerprint;
    f.S.resize(k);
    f.U.resize(m, k);
    CMatrix vt(k, n);
    const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, a.data(), m, f.S.data(), f.U.data(), m,
                                           vt.data(), k);
    if (info != 0)
        fail(ErrorKind::numeric, "zgesdd failed with info " + std::to_string(info));
    f.V = vt.adjoint();
    return f;
}

RMatrix ImageResult::image() const
{
    const auto n = static_cast<std::size_t>(intensity.size());
    const std::size_t az = azimuth_count ? azimuth_count : n;
    require(az > 0 && n % az == 0, ErrorKind::shape, "intensity length is not a multiple of the azimuth count");
    RMatrix out(static_cast<Eigen::Index>(n / az), static_cast<Eigen::Index>(az));
    for (std::size_t e = 0; e < n / az; ++e)
        for (std::size_t a = 0; a < az; ++a)
            out(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(a)) =
                intensity[static_cast<Eigen::Index>(e * az + a)];
    return out;
}

std::size_t truncation_terms(const SvdFactorization& fact, const ReconConfig& cfg)
{
    const auto K = static_cast<std::size_t>(fact.S.size());
    require(K > 0, ErrorKind::shape, "empty factorization");
    std::size_t k = 0;
    if (cfg.truncation == Truncation::count)
    {
        require(cfg.sigma_max >= 1 && cfg.sigma_max <= K, ErrorKind::parameter,
                "sigma_max must lie in [1, " + std::to_string(K) + "], got " + std::to_string(cfg.sigma_max));
        k = cfg.sigma_max;
    }
    else
    {
        require(cfg.relative_threshold > 0.0 && cfg.relative_threshold < 1.0, ErrorKind::parameter,
                "relative threshold must lie in (0, 1)");
        const double cut = cfg.relative_threshold * fact.S[0];
        while (k < K && fact.S[static_cast<Eigen::Index>(k)] >= cut)
            ++k;
    }
    const double floor = fact.S[0] * static_cast<double>(std::max(fact.rows(), fact.cols())) *
                         std::numeric_limits<double>::epsilon();
    if (!(fact.S[0] > 0.0) || fact.S[static_cast<Eigen::Index>(k - 1)] <= floor)
        fail(ErrorKind::rank_deficiency, "singular value " + std::to_string(k) +
                                             " is numerically zero; use a smaller sigma_max");
    return k;
}

ImageResult reconstruct(const SvdFactorization& fact, const Eigen::Ref<const CVector>& y, const ReconConfig& cfg,
                        std::size_t azimuth_count)
{
    require(y.size() == fact.rows(), ErrorKind::shape,
            "measurement length " + std::to_string(y.size()) + " differs from model rows " +
                std::to_string(fact.rows()));
    const std::size_t k = truncation_terms(fact, cfg);
    const auto kk = static_cast<Eigen::Index>(k);

    CVector coef = fact.U.leftCols(kk).adjoint() * y;
    coef.array() /= fact.S.head(kk).array().cast<cplx>();

    ImageResult r;
    r.amplitude = fact.V.leftCols(kk) * coef;
    r.intensity = r.amplitude.cwiseAbs();
    if (cfg.normalize_output)
    {
        const double peak = r.intensity.maxCoeff();
        if (peak > 0.0)
            r.intensity /= peak;
    }
    r.azimuth_count = azimuth_count;
    r.terms = k;
    r.config = cfg;
    return r;
}

CVector background_subtract(const Eigen::Ref<const CVector>& y, const Eigen::Ref<const CVector>& y_background)
{
    require(y.size() == y_background.size(), ErrorKind::shape, "measurement and background lengths differ");
    return y - y_background;
}

RVector display_normalize(const Eigen::Ref<const RVector>& intensity, double floor)
{
    RVector out = intensity;
    const double peak = out.size() ? out.maxCoeff() : 0.0;
    if (peak > 0.0)
        out /= peak;
    return out.cwiseMax(floor).cwiseMin(1.0);
}

std::vector<std::size_t> local_maxima(const Eigen::Ref<const RVector>& response)
{
    std::vector<std::size_t> out;
    const auto n = static_cast<std::size_t>(response.size());
    if (n == 0)
        return out;
    if (n == 1)
        return {0};
    std::size_t i = 0;
    while (i < n)
    {
        // Extent of the plateau starting at i.
        std::size_t j = i;
        while (j + 1 < n && response[static_cast<Eigen::Index>(j + 1)] == response[static_cast<Eigen::Index>(i)])
            ++j;
        const double v = response[static_cast<Eigen::Index>(i)];
        const bool left = i == 0 || response[static_cast<Eigen::Index>(i - 1)] < v;
        const bool right = j == n - 1 || response[static_cast<Eigen::Index>(j + 1)] < v;
        if (left && right && !(i == 0 && j == n - 1))
            out.push_back(i);
        i = j + 1;
    }
    return out;
}

TwoPeakResult resolve_two(const Eigen::Ref<const RVector>& response, const std::vector<double>& angles_deg,
                          double target_a_deg, double target_b_deg, double dip_power_fraction)
{
    require(static_cast<std::size_t>(response.size()) == angles_deg.size(), ErrorKind::shape,
            "response and angle axis lengths differ");
    require(target_a_deg != target_b_deg, ErrorKind::parameter, "targets must be distinct");
    if (target_a_deg > target_b_deg)
        std::swap(target_a_deg, target_b_deg);
    const double half_sep = 0.5 * (target_b_deg - target_a_deg);

    auto peaks = local_maxima(response);
    std::sort(peaks.begin(), peaks.end(), [&](std::size_t p, std::size_t q) {
        return response[static_cast<Eigen::Index>(p)] > response[static_cast<Eigen::Index>(q)];
    });

    TwoPeakResult r;
    if (peaks.size() < 2)
        return r;
    std::size_t a = std::min(peaks[0], peaks[1]);
    std::size_t b = std::max(peaks[0], peaks[1]);
    r.peak_a = a;
    r.peak_b = b;

    Eigen::Index valley = static_cast<Eigen::Index>(a);
    for (std::size_t i = a; i <= b; ++i)
        if (response[static_cast<Eigen::Index>(i)] < response[valley])
            valley = static_cast<Eigen::Index>(i);
    r.valley = static_cast<std::size_t>(valley);

    const double lower = std::min(response[static_cast<Eigen::Index>(a)], response[static_cast<Eigen::Index>(b)]);
    if (lower <= 0.0)
        return r;
    r.dip_ratio = (response[valley] * response[valley]) / (lower * lower);

    const bool near_a = std::abs(angles_deg[a] - target_a_deg) <= half_sep;
    const bool near_b = std::abs(angles_deg[b] - target_b_deg) <= half_sep;
    r.resolved = near_a && near_b && r.dip_ratio < dip_power_fraction;
    return r;
}

} // namespace pinhole
