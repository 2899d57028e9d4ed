// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pinhole/forward.hpp"
#include "pinhole/recon.hpp"
#include "pinhole/types.hpp"

namespace pinhole
{

// Amplitude level that corresponds to half power.
inline constexpr double half_power_amplitude = 0.70710678118654752440;

struct PsfCurve
{
    std::vector<double> angles_deg;
    RVector response; // peak-normalized |x|
    double fwhp_deg = 0.0;
    std::size_t peak_index = 0;
    bool bounded = true; // false when the response never drops below half power on one side
};

// Width at `level` around the global maximum, with linear interpolation between samples.
// Sides that never cross `level` extend to the end of the axis.
double full_width_at(const std::vector<double>& angles_deg, const Eigen::Ref<const RVector>& response,
                     double level, bool* bounded = nullptr);

// Noiseless reconstruction of a unit point target at the grid point nearest target_deg.
PsfCurve psf(const SvdFactorization& fact, const ForwardModel& model, const SceneGrid& grid, double target_deg,
             const ReconConfig& cfg, double elevation_deg = 0.0);
PsfCurve psf(const ForwardModel& model, const SceneGrid& grid, double target_deg, const ReconConfig& cfg,
             double elevation_deg = 0.0);

// Reconstruction settings that keep every singular value above 1e-5 of the largest.
ReconConfig full_rank_config(double relative_threshold = 1e-5);

enum class SarKind
{
    linear,
    circular,
};

std::string_view to_string(SarKind kind);
SarKind parse_sar_kind(std::string_view name);

// Colocated monostatic SAR over the same scene grid with entries (1/d^2) exp(i 4 pi d / lambda).
// linear: aperture of length extent_m along x, centred on the origin, lambda/4 spacing.
// circular: `positions` uniformly spaced points on a circle of radius extent_m in the z = 0 plane.
ForwardModel sar_baseline(SarKind kind, double extent_m, const RadarConfig& radar, const SceneGrid& grid,
                          std::size_t positions = 1000);

// Noise variance that leaves `usable` singular values above the noise-equivalent level for a
// unit point target: the level sits between S_usable and S_usable+1.
double calibrated_noise_power(const Eigen::Ref<const RVector>& S, std::size_t usable, std::size_t scene_points);

// Number of singular values with S_i^2 > noise_power * scene_points.
std::size_t usable_singular_values(const Eigen::Ref<const RVector>& S, double noise_power, std::size_t scene_points);

// S / reference, truncated to `count` entries (0: all).
RVector normalized_spectrum(const Eigen::Ref<const RVector>& S, double reference, std::size_t count = 0);

enum class SweepParameter
{
    width,
    radius,
    depth,
    blades,
    attenuation,
};

std::string_view to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view name);

struct SweepRow
{
    double value = 0.0;
    double fwhp_deg = 0.0;
    double s_first = 0.0;
    double s_10 = 0.0;
    double s_40 = 0.0;
    std::size_t usable = 0; // above the supplied noise floor; 0 when none given
};

struct SweepResult
{
    SweepParameter parameter = SweepParameter::radius;
    std::vector<SweepRow> rows;
    std::vector<std::string> warnings; // skipped values
};

struct SweepOptions
{
    double target_deg = 0.0;
    ReconConfig recon = full_rank_config();
    std::optional<double> noise_power; // fixed floor for the usable count
};

// One forward model per value, with the named parameter replaced in `base`. Infeasible
// geometries (width > 2 * radius, unsupported blade counts) are skipped with a warning.
SweepResult sweep(SweepParameter parameter, const std::vector<double>& values, const SystemConfig& base,
                  const SweepOptions& options = {});

struct MetricReport
{
    double sharpness_ratio = 0.0;
    double mse = 0.0;
    double ssim = 0.0;
    double chamfer_m = 0.0;
};

// Sum of |D(0, f)| for azimuth frequencies f >= 0.1 cycles/bin, where D is the 2-D DFT of the
// image (rows: elevation, columns: azimuth), divided by the same sum for the reference.
double sharpness(const Eigen::Ref<const RMatrix>& image, const Eigen::Ref<const RMatrix>& reference);
double high_frequency_content(const Eigen::Ref<const RMatrix>& image, double min_frequency = 0.1);

// 1e3 * mean squared difference over pixels whose reference lies in [window_lo, window_hi].
double mse(const Eigen::Ref<const RMatrix>& image, const Eigen::Ref<const RMatrix>& reference,
           double window_lo = 0.01, double window_hi = 1.0);

// Mean SSIM over all 8x8 windows (stride 1), dynamic range 1, K1 = 0.01, K2 = 0.03.
double ssim(const Eigen::Ref<const RMatrix>& image, const Eigen::Ref<const RMatrix>& reference);

using Point2 = std::array<double, 2>;

// Symmetric mean nearest-neighbour distance: (mean_a d(a, B) + mean_b d(b, A)) / 2.
double chamfer(const std::vector<Point2>& a, const std::vector<Point2>& b);

// Pixels at or above fraction * peak, placed at (R sin az, R cos az) in metres.
std::vector<Point2> image_points(const Eigen::Ref<const RMatrix>& image, const SceneGrid& grid,
                                 double fraction = 0.5);

// Reports all four metrics; images must share the grid's shape.
MetricReport compare_images(const Eigen::Ref<const RMatrix>& image, const Eigen::Ref<const RMatrix>& reference,
                            const SceneGrid& grid);

inline constexpr double standard_gravity = 9.81;

// m g r omega.
double rotational_power(double mass_kg, double radius_m, double omega_rad_s);
double rpm_to_rad_s(double rpm);

} // namespace pinhole
