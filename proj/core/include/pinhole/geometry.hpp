// SPDX-License-Identifier: Apache-2.0
//
// Coordinate frame used throughout the library:
//   antenna plane      z = 0
//   rotation axis      through the origin, parallel to z
//   mask plane         z = plane_depth_m
//   boresight          +z
//   azimuth            rotation in the x-z plane (positive towards +x)
//   elevation          towards +y
// The antenna pair sits at y = -axis_offset_m, below the rotation axis.
#pragma once

#include <cstddef>
#include <vector>

#include "pinhole/types.hpp"

namespace pinhole
{

struct RadarConfig
{
    double wavelength_m = 4.0e-3;
    Vec3 tx_position = Vec3(-0.005, -0.12, 0.0);
    Vec3 rx_position = Vec3(0.005, -0.12, 0.0);
    double azimuth_fov_deg = 50.0;   // half-power half-angle
    double elevation_fov_deg = 20.0; // half-power half-angle

    bool colocated() const { return (tx_position - rx_position).norm() == 0.0; }
    void validate() const;
};

// Tx/Rx pair centred at (0, -axis_offset_m, 0) and split along x by separation_m.
// separation_m = 0 gives the colocated configuration.
RadarConfig make_radar(double axis_offset_m, double separation_m = 0.01, double wavelength_m = 4.0e-3);

struct SceneGrid
{
    double range_m = 20.0;
    std::vector<double> azimuth_deg;
    std::vector<double> elevation_deg{0.0};
    std::vector<Vec3> points; // elevation-major: index = e * |azimuth| + a

    std::size_t size() const { return points.size(); }
    std::size_t azimuth_count() const { return azimuth_deg.size(); }
    std::size_t elevation_count() const { return elevation_deg.size(); }
    std::size_t index(std::size_t elevation_idx, std::size_t azimuth_idx) const
    {
        return elevation_idx * azimuth_deg.size() + azimuth_idx;
    }
    // Nearest azimuth bin on the given elevation ring.
    std::size_t nearest_index(double azimuth_deg, double elevation_deg = 0.0) const;
};

Vec3 scene_point(double range_m, double azimuth_deg, double elevation_deg);

SceneGrid build_scene_grid(double range_m, double az_min_deg, double az_max_deg, double az_step_deg,
                           const std::vector<double>& elevation_deg = {0.0});

enum class MaskMode
{
    regular_pinhole,
    inverse_pinhole,
};

struct MaskGeometry
{
    int blade_count = 1;
    double blade_length_m = 0.16;
    double blade_width_m = 0.016;
    double plane_depth_m = 0.12;
    double axis_offset_m = 0.12;
    double attenuation_db = 30.0;
    MaskMode mode = MaskMode::inverse_pinhole;

    void validate() const;
};

// Half-angle, in degrees, of the cone through which the swept blade is seen from the axis.
double effective_fov_deg(const MaskGeometry& mask);

// Region of the mask plane covered by the blades at one rotation angle. Each blade is
// a strip of width blade_width_m running from the axis out to blade_length_m, with the
// tip trimmed to the swept radius. Blade 0 points along +y at angle 0 and advances
// counter-clockwise; further blades are spaced uniformly by 2*pi/blade_count.
class BladeFootprint
{
public:
    BladeFootprint(const MaskGeometry& mask, double rotation_angle_rad);

    bool covers(double x, double y) const { return signed_distance(x, y) >= 0.0; }
    bool covers(const Vec3& p) const { return covers(p.x(), p.y()); }

    // Positive inside the footprint, negative outside. Exact inside, a lower bound
    // on the true distance outside.
    double signed_distance(double x, double y) const;

    // Conservative bounding radius of the footprint around the axis.
    double reach() const { return length_; }

private:
    double length_;
    double half_width_;
    int blades_;
    std::vector<Eigen::Vector2d> directions_;
};

BladeFootprint blade_footprint(const MaskGeometry& mask, double rotation_angle_rad);

struct RotationSampling
{
    std::size_t positions_per_rotation = 1000;
    std::vector<double> angles_rad;

    std::size_t size() const { return angles_rad.size(); }
};

RotationSampling make_rotation(std::size_t positions_per_rotation = 1000);

// Cell-centred square lattice on the mask plane, |x|, |y| <= extent_m.
struct MaskPlaneSampling
{
    double spacing_m = 2.0e-3;
    double extent_m = 0.176;
    double depth_m = 0.12;
    std::vector<Vec3> samples;

    std::size_t size() const { return samples.size(); }
    double cell_area() const { return spacing_m * spacing_m; }
};

// spacing_m <= 0 selects lambda/2; extent_m <= 0 selects blade_length + blade_width.
MaskPlaneSampling make_plane_sampling(const RadarConfig& radar, const MaskGeometry& mask, double spacing_m = 0.0,
                                      double extent_m = 0.0);

} // namespace pinhole
