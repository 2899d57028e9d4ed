// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "pinhole/forward.hpp"
#include "pinhole/geometry.hpp"
#include "pinhole/types.hpp"

namespace pinhole
{

// Near-range return magnitude per radar sample.
struct RotationSignature
{
    RVector samples;
    std::size_t nominal_period_samples = 0;

    std::size_t size() const { return static_cast<std::size_t>(samples.size()); }
};

// Blade angles reached by a motor whose speed is speed_rpm[s] during sample s. At
// nominal_rpm every sample advances the blade by 2 pi / positions_per_rotation.
RotationSampling warped_rotation(const std::vector<double>& speed_rpm, std::size_t positions_per_rotation,
                                 double nominal_rpm = 600.0);

// Magnitude of the mask's own reflection at each rotation angle: the sum over mask-plane
// samples of (1 - T(m)) pattern_tx pattern_rx G(tx, m) G(m, rx) dA.
RotationSignature synth_signature(const RadarConfig& radar, const MaskGeometry& mask, const RotationSampling& rotation,
                                  double plane_spacing_m = 0.0);

// Same, sampled along the speed profile.
RotationSignature synth_signature(const RadarConfig& radar, const MaskGeometry& mask,
                                  const std::vector<double>& speed_rpm, std::size_t positions_per_rotation,
                                  double nominal_rpm = 600.0, double plane_spacing_m = 0.0);

struct WarpPath
{
    std::vector<std::pair<std::size_t, std::size_t>> pairs; // (template, observed)
    double cost = 0.0;
};

struct DtwOptions
{
    // Sakoe-Chiba half-width as a fraction of the template length; values >= 1 leave the
    // search unconstrained.
    double band_fraction = 0.1;
};

// Squared-difference DTW with steps (1,0), (0,1), (1,1). Throws an alignment error when the
// band cannot reach the end cell, i.e. when the lengths differ by more than the band.
WarpPath dtw_align(const RotationSignature& templ, const RotationSignature& observed, const DtwOptions& options = {});

double dtw_cost(const Eigen::Ref<const RVector>& a, const Eigen::Ref<const RVector>& b,
                const DtwOptions& options = {});

// Fractional observed index for every template index. Groups of pairs sharing a template
// index collapse to their mean; runs of template indices sharing one observed index are
// spread linearly between their neighbours. A non-zero `smoothing` applies a centred moving
// average of that many samples (shrinking at the ends), for when the speed varies slowly
// but the path is jittery.
std::vector<double> warp_positions(const WarpPath& path, std::size_t template_length, std::size_t smoothing = 0);

// Re-indexes y onto the template's uniform rotation grid by linear interpolation of the
// complex samples at warp_positions.
MeasurementSet resample_to_uniform(const MeasurementSet& y, const WarpPath& path, std::size_t smoothing = 0);

// log(1 + s / (floor_ratio * max s)): keeps the low-energy part of the trace from being
// ignored by the squared-difference cost.
RotationSignature log_compress(const RotationSignature& sig, double floor_ratio = 0.01);

// One magnitude per line; blank lines and '#' comments skipped.
RotationSignature load_signature_csv(const std::filesystem::path& path, std::size_t nominal_period_samples);

} // namespace pinhole
