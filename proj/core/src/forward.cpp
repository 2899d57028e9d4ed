// SPDX-License-Identifier: Apache-2.0
#include "pinhole/forward.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "pinhole/error.hpp"
#include "pinhole/hash.hpp"

namespace pinhole
{

namespace
{

std::uint64_t fingerprint_inputs(const RadarConfig& radar, const SceneGrid& grid, const MaskGeometry& mask,
                                 const RotationSampling& rotation, double spacing, double extent,
                                 Directionality directionality, const MaskOptions& mask_options, bool obliquity,
                                 const AntennaPattern& pattern)
{
    Fnv1a h;
    h.str("pinhole-forward-v1");
    h.f64(radar.wavelength_m);
    for (int i = 0; i < 3; ++i)
        h.f64(radar.tx_position[i]).f64(radar.rx_position[i]);
    h.f64(radar.azimuth_fov_deg).f64(radar.elevation_fov_deg);
    h.f64(grid.range_m).u64(grid.azimuth_deg.size()).u64(grid.elevation_deg.size());
    for (double a : grid.azimuth_deg)
        h.f64(a);
    for (double e : grid.elevation_deg)
        h.f64(e);
    h.u64(static_cast<std::uint64_t>(mask.blade_count));
    h.f64(mask.blade_length_m).f64(mask.blade_width_m).f64(mask.plane_depth_m).f64(mask.axis_offset_m);
    h.f64(mask.attenuation_db).u64(mask.mode == MaskMode::inverse_pinhole ? 1 : 0);
    h.u64(rotation.size());
    h.f64(spacing).f64(extent);
    h.u64(directionality == Directionality::bidirectional ? 1 : 0);
    h.u64(mask_options.soft_edges ? 1 : 0).u64(obliquity ? 1 : 0);
    h.f64(pattern.azimuth_exponent()).f64(pattern.elevation_exponent());
    // Tabulated patterns are probed on a fixed angle set.
    for (int deg = -90; deg <= 90; deg += 5)
        h.f64(pattern.azimuth_shape(deg2rad(deg))).f64(pattern.elevation_shape(deg2rad(deg)));
    return h.value();
}

} // namespace

std::uint64_t SystemConfig::fingerprint() const
{
    const auto plane = make_plane_sampling(radar, mask, plane_spacing_m, plane_extent_m);
    return fingerprint_inputs(radar, grid, mask, rotation, plane.spacing_m, plane.extent_m, directionality,
                              mask_options, obliquity, pattern.value_or(AntennaPattern::from_radar(radar)));
}

ForwardModel combine_bidirectional(const PropagationMatrix& tx, const PropagationMatrix& rx, std::uint64_t fingerprint)
{
    require(tx.rows() == rx.rows() && tx.cols() == rx.cols(), ErrorKind::shape,
            "tx and rx propagation matrices differ in shape");
    ForwardModel model;
    model.B = tx.entries.cwiseProduct(rx.entries);
    model.fingerprint = fingerprint;
    model.directionality = Directionality::bidirectional;
    return model;
}

namespace
{

ForwardModel build_from_transmission(const RadarConfig& radar, const SceneGrid& grid, const MaskGeometry& mask,
                                     const RotationSampling& rotation, const MaskPlaneSampling& plane,
                                     Directionality directionality, const MaskTransmission& transmission,
                                     const MaskOptions& mask_options, const PropagationOptions& propagation)
{
    radar.validate();
    mask.validate();
    require(std::abs(plane.depth_m - mask.plane_depth_m) < 1e-12, ErrorKind::shape,
            "mask-plane sampling depth does not match mask geometry");
    const AntennaPattern pattern = propagation.pattern.value_or(AntennaPattern::from_radar(radar));

    ForwardModel model;
    model.directionality = directionality;
    model.fingerprint = fingerprint_inputs(radar, grid, mask, rotation, plane.spacing_m, plane.extent_m,
                                           directionality, mask_options, propagation.obliquity, pattern);

    if (directionality == Directionality::unidirectional)
    {
        auto mats = assemble_oneway_many({radar.rx_position}, radar.wavelength_m, grid, rotation, plane, transmission,
                                         pattern, propagation.obliquity);
        model.B = std::move(mats.front());
        return model;
    }
    if (radar.colocated())
    {
        auto mats = assemble_oneway_many({radar.rx_position}, radar.wavelength_m, grid, rotation, plane, transmission,
                                         pattern, propagation.obliquity);
        model.B = mats.front().cwiseProduct(mats.front());
        return model;
    }
    auto mats = assemble_oneway_many({radar.tx_position, radar.rx_position}, radar.wavelength_m, grid, rotation, plane,
                                     transmission, pattern, propagation.obliquity);
    model.B = mats[0].cwiseProduct(mats[1]);
    return model;
}

} // namespace

ForwardModel build_forward(const RadarConfig& radar, const SceneGrid& grid, const MaskGeometry& mask,
                           const RotationSampling& rotation, const MaskPlaneSampling& plane,
                           Directionality directionality, const MaskOptions& mask_options,
                           const PropagationOptions& propagation)
{
    const auto transmission = make_transmission(mask, rotation, plane, mask_options);
    return build_from_transmission(radar, grid, mask, rotation, plane, directionality, transmission, mask_options,
                                   propagation);
}

ForwardModel build_forward(const SystemConfig& config)
{
    const auto plane = make_plane_sampling(config.radar, config.mask, config.plane_spacing_m, config.plane_extent_m);
    return build_forward(config.radar, config.grid, config.mask, config.rotation, plane, config.directionality,
                         config.mask_options, PropagationOptions{config.obliquity, config.pattern});
}

ForwardModel build_forward_with(const SystemConfig& config, const MaskTransmission& transmission)
{
    const auto plane = make_plane_sampling(config.radar, config.mask, config.plane_spacing_m, config.plane_extent_m);
    auto model = build_from_transmission(config.radar, config.grid, config.mask, config.rotation, plane,
                                         config.directionality, transmission, config.mask_options,
                                         PropagationOptions{config.obliquity, config.pattern});
    // Distinguish from the model built with the mask's own transmission.
    Fnv1a h;
    h.u64(model.fingerprint).f64(transmission.background()).u64(transmission.positions());
    for (std::size_t t = 0; t < transmission.positions(); ++t)
    {
        h.u64(transmission.deviations(t).size());
        for (const auto& d : transmission.deviations(t))
            h.u64(d.sample).f64(d.value);
    }
    model.fingerprint = h.value();
    return model;
}

double reference_signal_power(const ForwardModel& model, std::size_t index)
{
    require(index < static_cast<std::size_t>(model.cols()), ErrorKind::parameter, "reference index outside grid");
    return model.B.col(static_cast<Eigen::Index>(index)).squaredNorm() / static_cast<double>(model.rows());
}

double noise_power_for_snr(double reference_power, double snr_db)
{
    require(reference_power >= 0.0, ErrorKind::parameter, "reference power must be non-negative");
    if (std::isinf(snr_db) && snr_db > 0)
        return 0.0;
    return reference_power * std::pow(10.0, -snr_db / 10.0);
}

double sample_interval_s(double rpm, std::size_t positions_per_rotation)
{
    require(rpm > 0.0 && positions_per_rotation > 0, ErrorKind::parameter, "rpm and positions must be positive");
    return 60.0 / (rpm * static_cast<double>(positions_per_rotation));
}

CVector complex_gaussian(std::size_t n, double power, std::uint64_t seed)
{
    require(power >= 0.0, ErrorKind::parameter, "noise power must be non-negative");
    CVector out = CVector::Zero(static_cast<Eigen::Index>(n));
    if (power == 0.0)
        return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(power / 2.0));
    for (Eigen::Index i = 0; i < out.size(); ++i)
    {
        const double re = normal(rng);
        const double im = normal(rng);
        out[i] = cplx(re, im);
    }
    return out;
}

MeasurementSet simulate(const ForwardModel& model, const Eigen::Ref<const CVector>& x, const NoiseModel& noise)
{
    require(x.size() == model.cols(), ErrorKind::shape,
            "scene vector has " + std::to_string(x.size()) + " entries, model has " + std::to_string(model.cols()));
    MeasurementSet ms;
    ms.y = model.B * x;
    ms.y += complex_gaussian(static_cast<std::size_t>(model.rows()), noise.noise_power, noise.seed);
    ms.truth = CVector(x);
    ms.fingerprint = model.fingerprint;
    return ms;
}

MeasurementSet simulate_moving(const ForwardModel& model, const Eigen::Ref<const CVector>& x,
                               double radial_velocity_mps, double sample_interval, double wavelength_m,
                               double range_m, const NoiseModel& noise)
{
    require(std::isfinite(radial_velocity_mps), ErrorKind::parameter, "velocity must be finite");
    require(range_m > 0.0 && wavelength_m > 0.0, ErrorKind::parameter, "range and wavelength must be positive");
    MeasurementSet ms = simulate(model, x, NoiseModel{0.0, noise.seed});
    for (Eigen::Index t = 0; t < ms.y.size(); ++t)
    {
        const double delta = radial_velocity_mps * static_cast<double>(t) * sample_interval;
        const double amp = (range_m / (range_m + delta)) * (range_m / (range_m + delta));
        ms.y[t] *= std::polar(amp, 2.0 * two_pi * delta / wavelength_m);
    }
    ms.y += complex_gaussian(static_cast<std::size_t>(ms.y.size()), noise.noise_power, noise.seed);
    return ms;
}

MeasurementSet apply_doppler(const MeasurementSet& y, double radial_velocity_mps, double sample_interval,
                             double wavelength_m)
{
    require(std::isfinite(radial_velocity_mps), ErrorKind::parameter, "velocity must be finite");
    MeasurementSet out = y;
    const double rate = two_pi * 2.0 * radial_velocity_mps * sample_interval / wavelength_m;
    for (Eigen::Index t = 0; t < out.y.size(); ++t)
        out.y[t] *= std::polar(1.0, rate * static_cast<double>(t));
    return out;
}

MeasurementSet apply_blade_phase(const MeasurementSet& y, const Eigen::Ref<const RVector>& phase)
{
    require(phase.size() == y.y.size(), ErrorKind::shape, "phase profile length differs from measurement length");
    MeasurementSet out = y;
    for (Eigen::Index t = 0; t < out.y.size(); ++t)
        out.y[t] *= std::polar(1.0, phase[t]);
    return out;
}

RVector blade_phase_profile(std::size_t positions, int blade_count, double amplitude_rad, double phase0_rad)
{
    RVector phi(static_cast<Eigen::Index>(positions));
    for (std::size_t t = 0; t < positions; ++t)
    {
        const double theta = two_pi * static_cast<double>(t) / static_cast<double>(positions);
        phi[static_cast<Eigen::Index>(t)] = amplitude_rad * std::sin(blade_count * theta + phase0_rad);
    }
    return phi;
}

RVector estimate_blade_phase(const MeasurementSet& y_cal, const BladePhaseOptions& options,
                             const std::optional<CVector>& reference)
{
    const Eigen::Index T = y_cal.y.size();
    require(T > 0, ErrorKind::estimation, "empty calibration record");
    require(options.blade_count >= 1, ErrorKind::parameter, "blade_count must be positive");
    if (reference)
        require(reference->size() == T, ErrorKind::shape, "reference length differs from calibration record");

    CVector z = y_cal.y;
    if (reference)
        z = z.cwiseProduct(reference->conjugate());

    // Mask the null neighbourhoods, where the phase is dominated by noise.
    const RVector mag = reference ? RVector(reference->cwiseAbs()) : RVector(y_cal.y.cwiseAbs());
    std::vector<double> sorted(mag.data(), mag.data() + T);
    std::nth_element(sorted.begin(), sorted.begin() + T / 2, sorted.end());
    const double threshold = options.null_threshold_ratio * sorted[static_cast<std::size_t>(T / 2)];
    const auto guard = static_cast<Eigen::Index>(options.guard_samples ? options.guard_samples
                                                                       : static_cast<std::size_t>(T / 100));
    std::vector<bool> valid(static_cast<std::size_t>(T), true);
    for (Eigen::Index t = 0; t < T; ++t)
        if (!(mag[t] >= threshold) || std::abs(z[t]) == 0.0)
            for (Eigen::Index g = -guard; g <= guard; ++g)
                valid[static_cast<std::size_t>(((t + g) % T + T) % T)] = false;

    std::vector<Eigen::Index> used;
    for (Eigen::Index t = 0; t < T; ++t)
        if (valid[static_cast<std::size_t>(t)])
            used.push_back(t);
    require(2 * used.size() >= static_cast<std::size_t>(T), ErrorKind::estimation,
            "more than half of the calibration record is masked");

    // Unwrap along the valid samples only.
    RVector phase(static_cast<Eigen::Index>(used.size()));
    double prev = std::arg(z[used[0]]);
    phase[0] = prev;
    for (std::size_t i = 1; i < used.size(); ++i)
    {
        const double raw = std::arg(z[used[i]]);
        double d = raw - std::remainder(prev, two_pi);
        d = std::remainder(d, two_pi);
        prev += d;
        phase[static_cast<Eigen::Index>(i)] = prev;
    }

    const int b = options.blade_count;
    const int columns = 1 + 2 * 2; // constant, harmonics b and 2b
    auto design_row = [&](Eigen::Index t, Eigen::Ref<RVector> row) {
        const double theta = two_pi * static_cast<double>(t) / static_cast<double>(T);
        row[0] = 1.0;
        for (int h = 1; h <= 2; ++h)
        {
            row[2 * h - 1] = std::cos(h * b * theta);
            row[2 * h] = std::sin(h * b * theta);
        }
    };
    RMatrix A(static_cast<Eigen::Index>(used.size()), columns);
    for (std::size_t i = 0; i < used.size(); ++i)
    {
        RVector row(columns);
        design_row(used[i], row);
        A.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    const RVector coef = A.colPivHouseholderQr().solve(phase);

    RVector profile(T);
    RVector row(columns);
    for (Eigen::Index t = 0; t < T; ++t)
    {
        design_row(t, row);
        profile[t] = row.dot(coef);
    }
    return profile;
}

} // namespace pinhole
