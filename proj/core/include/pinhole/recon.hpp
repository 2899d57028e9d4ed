// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "pinhole/forward.hpp"
#include "pinhole/types.hpp"

namespace pinhole
{

// Thin SVD, B = U diag(S) V^H with K = min(T, N) terms.
struct SvdFactorization
{
    CMatrix U;
    RVector S; // descending
    CMatrix V;
    std::uint64_t fingerprint = 0;

    Eigen::Index rank_bound() const { return S.size(); }
    Eigen::Index rows() const { return U.rows(); }
    Eigen::Index cols() const { return V.rows(); }
};

SvdFactorization factorize(const ForwardModel& model);
SvdFactorization factorize(const Eigen::Ref<const CMatrix>& B, std::uint64_t fingerprint = 0);

enum class Truncation
{
    count,    // keep the sigma_max largest singular values
    relative, // keep S_i >= relative_threshold * S_1
};

struct ReconConfig
{
    std::size_t sigma_max = 40;
    Truncation truncation = Truncation::count;
    double relative_threshold = 1e-5;
    bool normalize_output = false;
};

struct ImageResult
{
    RVector intensity; // |x| per scene point, optionally peak-normalized
    CVector amplitude;
    std::size_t azimuth_count = 0;
    std::size_t terms = 0; // singular values actually used
    ReconConfig config;

    // Elevation x azimuth view of intensity.
    RMatrix image() const;
};

// Number of terms the config keeps for this factorization. Throws parameter errors for an
// out-of-range sigma_max and rank-deficiency errors when a kept value is numerically zero.
std::size_t truncation_terms(const SvdFactorization& fact, const ReconConfig& cfg);

// x = V_k diag(1/S_1..k) U_k^H y.
ImageResult reconstruct(const SvdFactorization& fact, const Eigen::Ref<const CVector>& y, const ReconConfig& cfg,
                        std::size_t azimuth_count = 0);

// Elementwise y - y_background.
CVector background_subtract(const Eigen::Ref<const CVector>& y, const Eigen::Ref<const CVector>& y_background);

// Peak-normalize, then clamp to [floor, 1].
RVector display_normalize(const Eigen::Ref<const RVector>& intensity, double floor = 0.1);

// Strict local maxima (plateaus report their first sample); endpoints count when they exceed
// their single neighbour.
std::vector<std::size_t> local_maxima(const Eigen::Ref<const RVector>& response);

struct TwoPeakResult
{
    bool resolved = false;
    std::size_t peak_a = 0;
    std::size_t peak_b = 0;
    std::size_t valley = 0;
    double dip_ratio = 1.0; // valley power over the lower peak's power
};

// Two targets are resolved when the response has a local maximum within half the target
// separation of each target and the valley between them is below dip_power_fraction of the
// lower peak, in power (0.5: -3 dB).
TwoPeakResult resolve_two(const Eigen::Ref<const RVector>& response, const std::vector<double>& angles_deg,
                          double target_a_deg, double target_b_deg, double dip_power_fraction = 0.5);

} // namespace pinhole
