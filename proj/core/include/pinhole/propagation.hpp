// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "pinhole/geometry.hpp"
#include "pinhole/types.hpp"

namespace pinhole
{

class MaskTransmission;

// Separable antenna amplitude pattern. By default each axis is cos^p(angle) with p chosen
// so that the amplitude is 1/sqrt(2) (-3 dB power) at the configured half-power half-angle.
// Either axis may be replaced by a tabulated (angle_deg, amplitude) curve.
class AntennaPattern
{
public:
    AntennaPattern() : AntennaPattern(50.0, 20.0) {}
    AntennaPattern(double azimuth_hpbw_half_deg, double elevation_hpbw_half_deg);

    static AntennaPattern from_radar(const RadarConfig& radar);
    static AntennaPattern isotropic();

    // Rows of (angle_deg, amplitude). The table is treated as symmetric when it only
    // holds non-negative angles; values outside the table clamp to the end rows.
    void set_azimuth_table(std::vector<std::pair<double, double>> table);
    void set_elevation_table(std::vector<std::pair<double, double>> table);

    double azimuth_shape(double angle_rad) const;
    double elevation_shape(double angle_rad) const;

    double azimuth_exponent() const { return az_exponent_; }
    double elevation_exponent() const { return el_exponent_; }

private:
    double az_exponent_;
    double el_exponent_;
    std::vector<std::pair<double, double>> az_table_;
    std::vector<std::pair<double, double>> el_table_;
};

// Cosine-power exponent whose amplitude drops to 1/sqrt(2) at half_angle_deg.
double cosine_power_exponent(double half_angle_deg);

// Reads a plain-text pattern file with one "angle_deg amplitude" pair per line.
// Blank lines and lines starting with '#' are skipped.
std::vector<std::pair<double, double>> load_pattern_table(const std::filesystem::path& path);

// Azimuth and elevation of a direction in the library frame (radians).
std::pair<double, double> direction_angles(const Vec3& direction);

double pattern_weight(const AntennaPattern& pattern, const Vec3& direction);

// Free-space scalar Green's function exp(i 2 pi d / lambda) / d.
cplx greens(const Vec3& p, const Vec3& q, double wavelength_m);

// First Rayleigh-Sommerfeld secondary-source factor (1/(i lambda)) cos(chi) G(source, dest).
// With obliquity disabled cos(chi) is replaced by 1.
cplx rs_weight(const Vec3& source, const Vec3& dest, const Vec3& plane_normal, double wavelength_m,
               bool obliquity = true);

enum class AntennaEnd
{
    tx,
    rx,
};

enum class PropagationDirection
{
    tx_to_scene,
    scene_to_rx,
};

struct PropagationMatrix
{
    CMatrix entries; // rotation positions x scene points
    PropagationDirection direction = PropagationDirection::tx_to_scene;

    Eigen::Index rows() const { return entries.rows(); }
    Eigen::Index cols() const { return entries.cols(); }
};

struct PropagationOptions
{
    bool obliquity = true;
    // Defaults to AntennaPattern::from_radar(radar) when unset.
    std::optional<AntennaPattern> pattern;
};

// One-way transfer through the time-variant mask:
//   entry(t, j) = sum_m pattern(a -> m) G(a, m) T_t(m) RS(m, scene_j) dA
// where a is the selected antenna and T_t the mask transmission at rotation position t.
PropagationMatrix assemble_oneway(const RadarConfig& radar, const SceneGrid& grid, const MaskGeometry& mask,
                                  const RotationSampling& rotation, const MaskPlaneSampling& plane,
                                  AntennaEnd antenna_end, const MaskTransmission& transmission,
                                  const PropagationOptions& options = {});

// Assembles several one-way matrices that share the mask-to-scene kernel, one per antenna
// position. Used by the forward model to build the tx and rx sides in a single pass.
std::vector<CMatrix> assemble_oneway_many(const std::vector<Vec3>& antennas, double wavelength_m,
                                          const SceneGrid& grid, const RotationSampling& rotation,
                                          const MaskPlaneSampling& plane, const MaskTransmission& transmission,
                                          const AntennaPattern& pattern, bool obliquity);

} // namespace pinhole
