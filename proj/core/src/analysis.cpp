// SPDX-License-Identifier: Apache-2.0
#include "pinhole/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pinhole/error.hpp"
#include "pinhole/hash.hpp"

namespace pinhole
{

double full_width_at(const std::vector<double>& angles_deg, const Eigen::Ref<const RVector>& response, double level,
                     bool* bounded)
{
    const auto n = static_cast<Eigen::Index>(response.size());
    require(n >= 2 && static_cast<std::size_t>(n) == angles_deg.size(), ErrorKind::shape,
            "response and angle axis must match and hold at least two samples");
    Eigen::Index peak = 0;
    const double top = response.maxCoeff(&peak);
    require(top > 0.0, ErrorKind::undefined_metric, "response is identically zero");
    const double cut = level * top;
    bool ok = true;

    double left = angles_deg.front();
    Eigen::Index i = peak;
    while (i > 0 && response[i - 1] >= cut)
        --i;
    if (i == 0)
        ok = false;
    else
    {
        const double f = (response[i] - cut) / (response[i] - response[i - 1]);
        left = angles_deg[static_cast<std::size_t>(i)] +
               f * (angles_deg[static_cast<std::size_t>(i - 1)] - angles_deg[static_cast<std::size_t>(i)]);
    }

    double right = angles_deg.back();
    i = peak;
    while (i < n - 1 && response[i + 1] >= cut)
        ++i;
    if (i == n - 1)
        ok = false;
    else
    {
        const double f = (response[i] - cut) / (response[i] - response[i + 1]);
        right = angles_deg[static_cast<std::size_t>(i)] +
                f * (angles_deg[static_cast<std::size_t>(i + 1)] - angles_deg[static_cast<std::size_t>(i)]);
    }
    if (bounded)
        *bounded = ok;
    return right - left;
}

ReconConfig full_rank_config(double relative_threshold)
{
    ReconConfig cfg;
    cfg.truncation = Truncation::relative;
    cfg.relative_threshold = relative_threshold;
    return cfg;
}

PsfCurve psf(const SvdFactorization& fact, const ForwardModel& model, const SceneGrid& grid, double target_deg,
             const ReconConfig& cfg, double elevation_deg)
{
    require(static_cast<std::size_t>(model.cols()) == grid.size(), ErrorKind::shape, "model does not match grid");
    require(!grid.azimuth_deg.empty(), ErrorKind::shape, "empty grid");
    const double step = grid.azimuth_deg.size() > 1 ? std::abs(grid.azimuth_deg[1] - grid.azimuth_deg[0]) : 0.0;
    require(target_deg >= grid.azimuth_deg.front() - step / 2 && target_deg <= grid.azimuth_deg.back() + step / 2,
            ErrorKind::parameter, "target azimuth " + std::to_string(target_deg) + " deg lies outside the grid");
    const auto el_it = std::find_if(grid.elevation_deg.begin(), grid.elevation_deg.end(),
                                    [&](double e) { return std::abs(e - elevation_deg) < 1e-9; });
    require(el_it != grid.elevation_deg.end(), ErrorKind::parameter, "target elevation is not on the grid");
    const auto el_idx = static_cast<std::size_t>(el_it - grid.elevation_deg.begin());

    const std::size_t j = grid.nearest_index(target_deg, elevation_deg);
    const CVector y = model.B.col(static_cast<Eigen::Index>(j));
    const ImageResult img = reconstruct(fact, y, cfg, grid.azimuth_count());

    PsfCurve curve;
    curve.angles_deg = grid.azimuth_deg;
    curve.response = img.intensity.segment(static_cast<Eigen::Index>(grid.index(el_idx, 0)),
                                           static_cast<Eigen::Index>(grid.azimuth_count()));
    Eigen::Index peak = 0;
    const double top = curve.response.maxCoeff(&peak);
    require(top > 0.0, ErrorKind::undefined_metric, "point-target reconstruction is identically zero");
    curve.response /= top;
    curve.peak_index = static_cast<std::size_t>(peak);
    curve.fwhp_deg = full_width_at(curve.angles_deg, curve.response, half_power_amplitude, &curve.bounded);
    return curve;
}

PsfCurve psf(const ForwardModel& model, const SceneGrid& grid, double target_deg, const ReconConfig& cfg,
             double elevation_deg)
{
    return psf(factorize(model), model, grid, target_deg, cfg, elevation_deg);
}

std::string_view to_string(SarKind kind)
{
    return kind == SarKind::linear ? "linear" : "circular";
}

SarKind parse_sar_kind(std::string_view name)
{
    if (name == "linear")
        return SarKind::linear;
    if (name == "circular")
        return SarKind::circular;
    fail(ErrorKind::parameter, "unknown SAR kind '" + std::string(name) + "'");
}

ForwardModel sar_baseline(SarKind kind, double extent_m, const RadarConfig& radar, const SceneGrid& grid,
                          std::size_t positions)
{
    require(extent_m >= 0.0 && std::isfinite(extent_m), ErrorKind::parameter, "SAR extent must be non-negative");
    require(grid.size() > 0, ErrorKind::shape, "empty scene grid");
    const double lambda = radar.wavelength_m;

    std::vector<Vec3> track;
    if (kind == SarKind::linear)
    {
        const double pitch = lambda / 4.0;
        const auto count = static_cast<std::size_t>(std::floor(extent_m / pitch + 1e-9)) + 1;
        const double start = -0.5 * static_cast<double>(count - 1) * pitch;
        for (std::size_t i = 0; i < count; ++i)
            track.emplace_back(start + static_cast<double>(i) * pitch, 0.0, 0.0);
    }
    else
    {
        require(positions > 0, ErrorKind::parameter, "circular SAR needs at least one position");
        for (std::size_t i = 0; i < positions; ++i)
        {
            const double a = two_pi * static_cast<double>(i) / static_cast<double>(positions);
            track.emplace_back(-extent_m * std::sin(a), extent_m * std::cos(a), 0.0);
        }
    }

    ForwardModel model;
    model.directionality = Directionality::bidirectional;
    model.B.resize(static_cast<Eigen::Index>(track.size()), static_cast<Eigen::Index>(grid.size()));
    const double k2 = 2.0 * two_pi / lambda;
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < model.B.cols(); ++j)
        for (Eigen::Index i = 0; i < model.B.rows(); ++i)
        {
            const double d = (grid.points[static_cast<std::size_t>(j)] - track[static_cast<std::size_t>(i)]).norm();
            model.B(i, j) = std::polar(1.0 / (d * d), k2 * d);
        }

    Fnv1a h;
    h.str("pinhole-sar-v1").str(to_string(kind)).f64(extent_m).f64(lambda).u64(track.size());
    h.f64(grid.range_m);
    for (double a : grid.azimuth_deg)
        h.f64(a);
    for (double e : grid.elevation_deg)
        h.f64(e);
    model.fingerprint = h.value();
    return model;
}

double calibrated_noise_power(const Eigen::Ref<const RVector>& S, std::size_t usable, std::size_t scene_points)
{
    require(usable >= 1 && usable < static_cast<std::size_t>(S.size()), ErrorKind::parameter,
            "usable count must leave at least one discarded singular value");
    require(scene_points > 0, ErrorKind::parameter, "scene must be non-empty");
    const auto u = static_cast<Eigen::Index>(usable);
    return S[u - 1] * S[u] / static_cast<double>(scene_points);
}

std::size_t usable_singular_values(const Eigen::Ref<const RVector>& S, double noise_power, std::size_t scene_points)
{
    const double floor = noise_power * static_cast<double>(scene_points);
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < S.size(); ++i)
        if (S[i] * S[i] > floor)
            ++n;
    return n;
}

RVector normalized_spectrum(const Eigen::Ref<const RVector>& S, double reference, std::size_t count)
{
    require(reference > 0.0, ErrorKind::undefined_metric, "normalization reference must be positive");
    const auto n = count ? std::min<Eigen::Index>(static_cast<Eigen::Index>(count), S.size()) : S.size();
    return S.head(n) / reference;
}

std::string_view to_string(SweepParameter p)
{
    switch (p)
    {
    case SweepParameter::width:
        return "width";
    case SweepParameter::radius:
        return "radius";
    case SweepParameter::depth:
        return "depth";
    case SweepParameter::blades:
        return "blades";
    case SweepParameter::attenuation:
        return "attenuation";
    }
    return "?";
}

SweepParameter parse_sweep_parameter(std::string_view name)
{
    for (auto p : {SweepParameter::width, SweepParameter::radius, SweepParameter::depth, SweepParameter::blades,
                   SweepParameter::attenuation})
        if (name == to_string(p))
            return p;
    fail(ErrorKind::parameter, "unknown sweep parameter '" + std::string(name) + "'");
}

SweepResult sweep(SweepParameter parameter, const std::vector<double>& values, const SystemConfig& base,
                  const SweepOptions& options)
{
    require(!values.empty(), ErrorKind::parameter, "sweep needs at least one value");
    SweepResult out;
    out.parameter = parameter;
    for (double v : values)
    {
        SystemConfig cfg = base;
        switch (parameter)
        {
        case SweepParameter::width:
            cfg.mask.blade_width_m = v;
            break;
        case SweepParameter::radius:
            cfg.mask.blade_length_m = v;
            break;
        case SweepParameter::depth:
            cfg.mask.plane_depth_m = v;
            break;
        case SweepParameter::blades:
            cfg.mask.blade_count = static_cast<int>(std::lround(v));
            break;
        case SweepParameter::attenuation:
            cfg.mask.attenuation_db = v;
            break;
        }
        const std::string label = std::string(to_string(parameter)) + "=" + std::to_string(v);
        if (cfg.mask.blade_width_m > 2.0 * cfg.mask.blade_length_m)
        {
            out.warnings.push_back(label + ": width exceeds twice the radius, skipped");
            continue;
        }
        try
        {
            cfg.mask.validate();
        }
        catch (const Error& e)
        {
            out.warnings.push_back(label + ": " + e.what() + ", skipped");
            continue;
        }

        const ForwardModel model = build_forward(cfg);
        const SvdFactorization fact = factorize(model);
        SweepRow row;
        row.value = v;
        row.fwhp_deg = psf(fact, model, cfg.grid, options.target_deg, options.recon).fwhp_deg;
        auto at = [&](Eigen::Index i) { return i < fact.S.size() ? fact.S[i] : 0.0; };
        row.s_first = at(0);
        row.s_10 = at(9);
        row.s_40 = at(39);
        if (options.noise_power)
            row.usable = usable_singular_values(fact.S, *options.noise_power, cfg.grid.size());
        out.rows.push_back(row);
    }
    return out;
}

double rotational_power(double mass_kg, double radius_m, double omega_rad_s)
{
    require(mass_kg >= 0.0 && radius_m >= 0.0 && omega_rad_s >= 0.0, ErrorKind::parameter,
            "mass, radius and angular rate must be non-negative");
    return mass_kg * standard_gravity * radius_m * omega_rad_s;
}

double rpm_to_rad_s(double rpm)
{
    return rpm * two_pi / 60.0;
}

} // namespace pinhole
