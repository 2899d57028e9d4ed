// SPDX-License-Identifier: Apache-2.0
#include "pinhole/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pinhole/error.hpp"

namespace pinhole
{

double db_to_amplitude(double attenuation_db)
{
    if (std::isinf(attenuation_db) && attenuation_db > 0)
        return 0.0;
    return std::pow(10.0, -attenuation_db / 20.0);
}

void RadarConfig::validate() const
{
    require(wavelength_m > 0.0 && std::isfinite(wavelength_m), ErrorKind::parameter, "wavelength_m must be positive");
    require(azimuth_fov_deg > 0.0 && azimuth_fov_deg < 90.0, ErrorKind::parameter,
            "azimuth_fov_deg must lie in (0, 90)");
    require(elevation_fov_deg > 0.0 && elevation_fov_deg < 90.0, ErrorKind::parameter,
            "elevation_fov_deg must lie in (0, 90)");
    require(tx_position.allFinite() && rx_position.allFinite(), ErrorKind::parameter,
            "antenna positions must be finite");
}

RadarConfig make_radar(double axis_offset_m, double separation_m, double wavelength_m)
{
    require(separation_m >= 0.0, ErrorKind::parameter, "tx/rx separation must be non-negative");
    RadarConfig radar;
    radar.wavelength_m = wavelength_m;
    radar.tx_position = Vec3(-separation_m / 2.0, -axis_offset_m, 0.0);
    radar.rx_position = Vec3(separation_m / 2.0, -axis_offset_m, 0.0);
    return radar;
}

Vec3 scene_point(double range_m, double azimuth_deg, double elevation_deg)
{
    const double az = deg2rad(azimuth_deg);
    const double el = deg2rad(elevation_deg);
    return {range_m * std::cos(el) * std::sin(az), range_m * std::sin(el), range_m * std::cos(el) * std::cos(az)};
}

std::size_t SceneGrid::nearest_index(double az, double el) const
{
    require(!azimuth_deg.empty() && !elevation_deg.empty(), ErrorKind::parameter, "empty scene grid");
    auto nearest = [](const std::vector<double>& v, double x) {
        auto it = std::lower_bound(v.begin(), v.end(), x);
        if (it == v.end())
            return v.size() - 1;
        if (it == v.begin())
            return std::size_t{0};
        const auto hi = static_cast<std::size_t>(it - v.begin());
        return (x - v[hi - 1] <= v[hi] - x) ? hi - 1 : hi;
    };
    return index(nearest(elevation_deg, el), nearest(azimuth_deg, az));
}

SceneGrid build_scene_grid(double range_m, double az_min_deg, double az_max_deg, double az_step_deg,
                           const std::vector<double>& elevation_deg)
{
    require(range_m > 0.0 && std::isfinite(range_m), ErrorKind::parameter, "range_m must be positive");
    require(az_step_deg > 0.0 && std::isfinite(az_step_deg), ErrorKind::parameter, "azimuth step must be positive");
    require(az_min_deg <= az_max_deg, ErrorKind::parameter, "az_min must not exceed az_max");
    require(!elevation_deg.empty(), ErrorKind::parameter, "elevation list must be non-empty");
    for (std::size_t i = 1; i < elevation_deg.size(); ++i)
        require(elevation_deg[i] > elevation_deg[i - 1], ErrorKind::parameter,
                "elevation angles must be strictly increasing");

    // Bin count tolerates round-off in (max - min) / step landing just above an integer.
    const double span = (az_max_deg - az_min_deg) / az_step_deg;
    const auto bins = static_cast<std::size_t>(std::ceil(span - 1e-9)) + 1;

    SceneGrid grid;
    grid.range_m = range_m;
    grid.elevation_deg = elevation_deg;
    grid.azimuth_deg.resize(bins);
    for (std::size_t i = 0; i < bins; ++i)
        grid.azimuth_deg[i] = az_min_deg + static_cast<double>(i) * az_step_deg;

    grid.points.reserve(bins * elevation_deg.size());
    for (double el : grid.elevation_deg)
        for (double az : grid.azimuth_deg)
            grid.points.push_back(scene_point(range_m, az, el));
    return grid;
}

void MaskGeometry::validate() const
{
    require(blade_count >= 1, ErrorKind::parameter, "blade_count must be positive");
    require(blade_count <= 2, ErrorKind::unsupported_configuration,
            "blade_count " + std::to_string(blade_count) + " not supported (1 or 2)");
    require(blade_width_m > 0.0, ErrorKind::parameter, "blade_width_m must be positive");
    require(blade_length_m > blade_width_m / 2.0, ErrorKind::parameter,
            "blade_length_m must exceed half the blade width");
    require(plane_depth_m > 0.0, ErrorKind::parameter, "plane_depth_m must be positive");
    require(axis_offset_m >= 0.0, ErrorKind::parameter, "axis_offset_m must be non-negative");
    require(attenuation_db >= 0.0, ErrorKind::parameter, "attenuation_db must be non-negative");
}

double effective_fov_deg(const MaskGeometry& mask)
{
    return rad2deg(std::atan(mask.blade_length_m / mask.plane_depth_m));
}

BladeFootprint::BladeFootprint(const MaskGeometry& mask, double rotation_angle_rad)
    : length_(mask.blade_length_m), half_width_(mask.blade_width_m / 2.0), blades_(mask.blade_count)
{
    mask.validate();
    directions_.reserve(static_cast<std::size_t>(blades_));
    for (int b = 0; b < blades_; ++b)
    {
        const double a = rotation_angle_rad + two_pi * b / blades_;
        directions_.emplace_back(-std::sin(a), std::cos(a));
    }
}

double BladeFootprint::signed_distance(double x, double y) const
{
    const double radial = length_ - std::hypot(x, y);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& u : directions_)
    {
        const double along = x * u.x() + y * u.y();
        const double across = -x * u.y() + y * u.x();
        const double d = std::min({along, half_width_ - std::abs(across), radial});
        best = std::max(best, d);
    }
    return best;
}

BladeFootprint blade_footprint(const MaskGeometry& mask, double rotation_angle_rad)
{
    return BladeFootprint(mask, rotation_angle_rad);
}

RotationSampling make_rotation(std::size_t positions_per_rotation)
{
    require(positions_per_rotation > 0, ErrorKind::parameter, "positions_per_rotation must be positive");
    RotationSampling rotation;
    rotation.positions_per_rotation = positions_per_rotation;
    rotation.angles_rad.resize(positions_per_rotation);
    for (std::size_t t = 0; t < positions_per_rotation; ++t)
        rotation.angles_rad[t] = two_pi * static_cast<double>(t) / static_cast<double>(positions_per_rotation);
    return rotation;
}

MaskPlaneSampling make_plane_sampling(const RadarConfig& radar, const MaskGeometry& mask, double spacing_m,
                                      double extent_m)
{
    radar.validate();
    mask.validate();
    if (spacing_m <= 0.0)
        spacing_m = radar.wavelength_m / 2.0;
    const double min_extent = mask.blade_length_m + mask.blade_width_m;
    if (extent_m <= 0.0)
        extent_m = min_extent;
    require(spacing_m <= radar.wavelength_m / 2.0 * (1.0 + 1e-12), ErrorKind::parameter,
            "mask-plane spacing must not exceed lambda/2");
    require(extent_m >= min_extent * (1.0 - 1e-12), ErrorKind::parameter,
            "mask-plane extent must cover blade_length + blade_width");

    MaskPlaneSampling plane;
    plane.spacing_m = spacing_m;
    plane.extent_m = extent_m;
    plane.depth_m = mask.plane_depth_m;

    const auto half = static_cast<long>(std::ceil(extent_m / spacing_m - 1e-9));
    plane.samples.reserve(static_cast<std::size_t>(4 * half * half));
    for (long iy = -half; iy < half; ++iy)
        for (long ix = -half; ix < half; ++ix)
            plane.samples.emplace_back((static_cast<double>(ix) + 0.5) * spacing_m,
                                       (static_cast<double>(iy) + 0.5) * spacing_m, mask.plane_depth_m);
    return plane;
}

} // namespace pinhole
