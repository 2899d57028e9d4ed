// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <optional>

#include "pinhole/geometry.hpp"
#include "pinhole/mask.hpp"
#include "pinhole/propagation.hpp"
#include "pinhole/types.hpp"

namespace pinhole
{

enum class Directionality
{
    unidirectional,
    bidirectional,
};

// Everything needed to assemble a sensing matrix.
struct SystemConfig
{
    RadarConfig radar;
    SceneGrid grid = build_scene_grid(20.0, -50.0, 50.0, 0.5);
    MaskGeometry mask;
    RotationSampling rotation = make_rotation(1000);
    double plane_spacing_m = 0.0; // 0: lambda/2
    double plane_extent_m = 0.0;  // 0: blade_length + blade_width
    Directionality directionality = Directionality::bidirectional;
    MaskOptions mask_options;
    bool obliquity = true;
    std::optional<AntennaPattern> pattern;

    std::uint64_t fingerprint() const;
};

// Sensing matrix B (rotation positions x scene points).
struct ForwardModel
{
    CMatrix B;
    std::uint64_t fingerprint = 0;
    Directionality directionality = Directionality::bidirectional;

    Eigen::Index rows() const { return B.rows(); }
    Eigen::Index cols() const { return B.cols(); }
};

// Bidirectional: B = F_tx .* F_rx. Unidirectional: B = F_rx.
ForwardModel build_forward(const RadarConfig& radar, const SceneGrid& grid, const MaskGeometry& mask,
                           const RotationSampling& rotation, const MaskPlaneSampling& plane,
                           Directionality directionality, const MaskOptions& mask_options = {},
                           const PropagationOptions& propagation = {});

ForwardModel build_forward(const SystemConfig& config);

// Same geometry with an explicit transmission (e.g. the all-open matrix O).
ForwardModel build_forward_with(const SystemConfig& config, const MaskTransmission& transmission);

// Entrywise product of two one-way matrices.
ForwardModel combine_bidirectional(const PropagationMatrix& tx, const PropagationMatrix& rx,
                                   std::uint64_t fingerprint = 0);

// Signal-independent circular complex Gaussian noise.
struct NoiseModel
{
    double noise_power = 0.0; // variance per complex sample
    std::uint64_t seed = 0;
};

struct MeasurementSet
{
    CVector y;
    std::optional<CVector> truth;
    double rpm = 600.0;
    double snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t fingerprint = 0;

    Eigen::Index size() const { return y.size(); }
};

// Mean per-sample power of a unit reflector in column `index`.
double reference_signal_power(const ForwardModel& model, std::size_t index);

// Noise variance giving snr_db relative to reference_power. +inf dB gives 0.
double noise_power_for_snr(double reference_power, double snr_db);

// Radar sample interval implied by the rotation rate: 60 / (rpm * positions).
double sample_interval_s(double rpm, std::size_t positions_per_rotation);

CVector complex_gaussian(std::size_t n, double power, std::uint64_t seed);

MeasurementSet simulate(const ForwardModel& model, const Eigen::Ref<const CVector>& x, const NoiseModel& noise);

// Radially moving scene: sample t sees every path lengthened by v * t * dt, which scales the
// two-way amplitude by (R / (R + v t dt))^2 and adds the two-way phase 4 pi v t dt / lambda.
MeasurementSet simulate_moving(const ForwardModel& model, const Eigen::Ref<const CVector>& x,
                               double radial_velocity_mps, double sample_interval, double wavelength_m,
                               double range_m, const NoiseModel& noise);

// y'(t) = y(t) exp(i 2 pi 2 v t dt / lambda). Compensation is apply_doppler with -v.
MeasurementSet apply_doppler(const MeasurementSet& y, double radial_velocity_mps, double sample_interval,
                             double wavelength_m);

// y'(t) = y(t) exp(i phi(t)).
MeasurementSet apply_blade_phase(const MeasurementSet& y, const Eigen::Ref<const RVector>& phase);

// amplitude * sin(blade_count * theta_t + phase0): the dominant term of the phase ripple
// a twin-blade propeller puts on the return.
RVector blade_phase_profile(std::size_t positions, int blade_count, double amplitude_rad, double phase0_rad = 0.0);

struct BladePhaseOptions
{
    int blade_count = 2;
    double null_threshold_ratio = 0.5; // samples under this fraction of the median magnitude are masked
    std::size_t guard_samples = 0;     // extra samples masked either side of a null (0: T / 100)
};

// Smooth component of the calibration phase: least-squares fit of harmonics that are multiples
// of blade_count up to 2 * blade_count, skipping the mask-null neighbourhoods. When `reference`
// (the predicted calibration return) is given, the fit is taken on arg(y * conj(reference)).
RVector estimate_blade_phase(const MeasurementSet& y_cal, const BladePhaseOptions& options = {},
                             const std::optional<CVector>& reference = std::nullopt);

} // namespace pinhole
