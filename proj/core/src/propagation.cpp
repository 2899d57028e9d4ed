// SPDX-License-Identifier: Apache-2.0
#include "pinhole/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "pinhole/error.hpp"
#include "pinhole/mask.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pinhole
{

namespace
{

double interpolate_table(const std::vector<std::pair<double, double>>& table, double angle_deg)
{
    // Tables holding only non-negative angles describe a symmetric pattern.
    if (table.front().first >= 0.0)
        angle_deg = std::abs(angle_deg);
    if (angle_deg <= table.front().first)
        return table.front().second;
    if (angle_deg >= table.back().first)
        return table.back().second;
    auto hi = std::upper_bound(table.begin(), table.end(), angle_deg,
                               [](double a, const auto& row) { return a < row.first; });
    auto lo = hi - 1;
    const double f = (angle_deg - lo->first) / (hi->first - lo->first);
    return lo->second + f * (hi->second - lo->second);
}

double cosine_power(double angle_rad, double exponent)
{
    const double c = std::cos(angle_rad);
    if (c <= 0.0)
        return 0.0;
    return std::pow(c, exponent);
}

void check_table(const std::vector<std::pair<double, double>>& table)
{
    require(table.size() >= 2, ErrorKind::parameter, "pattern table needs at least two rows");
    for (std::size_t i = 1; i < table.size(); ++i)
        require(table[i].first > table[i - 1].first, ErrorKind::parameter,
                "pattern table angles must be strictly increasing");
    for (const auto& [angle, amp] : table)
        require(std::isfinite(angle) && std::isfinite(amp) && amp >= 0.0, ErrorKind::parameter,
                "pattern table entries must be finite with non-negative amplitude");
}

} // namespace

double cosine_power_exponent(double half_angle_deg)
{
    require(half_angle_deg > 0.0 && half_angle_deg < 90.0, ErrorKind::parameter,
            "half-power half-angle must lie in (0, 90) degrees");
    return std::log(std::sqrt(0.5)) / std::log(std::cos(deg2rad(half_angle_deg)));
}

AntennaPattern::AntennaPattern(double azimuth_hpbw_half_deg, double elevation_hpbw_half_deg)
    : az_exponent_(cosine_power_exponent(azimuth_hpbw_half_deg)),
      el_exponent_(cosine_power_exponent(elevation_hpbw_half_deg))
{
}

AntennaPattern AntennaPattern::from_radar(const RadarConfig& radar)
{
    return {radar.azimuth_fov_deg, radar.elevation_fov_deg};
}

AntennaPattern AntennaPattern::isotropic()
{
    AntennaPattern p;
    p.az_exponent_ = 0.0;
    p.el_exponent_ = 0.0;
    return p;
}

void AntennaPattern::set_azimuth_table(std::vector<std::pair<double, double>> table)
{
    check_table(table);
    az_table_ = std::move(table);
}

void AntennaPattern::set_elevation_table(std::vector<std::pair<double, double>> table)
{
    check_table(table);
    el_table_ = std::move(table);
}

double AntennaPattern::azimuth_shape(double angle_rad) const
{
    if (!az_table_.empty())
        return interpolate_table(az_table_, rad2deg(angle_rad));
    if (az_exponent_ == 0.0)
        return 1.0;
    return cosine_power(angle_rad, az_exponent_);
}

double AntennaPattern::elevation_shape(double angle_rad) const
{
    if (!el_table_.empty())
        return interpolate_table(el_table_, rad2deg(angle_rad));
    if (el_exponent_ == 0.0)
        return 1.0;
    return cosine_power(angle_rad, el_exponent_);
}

std::vector<std::pair<double, double>> load_pattern_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    require(in.good(), ErrorKind::io, "cannot open pattern file " + path.string());
    std::vector<std::pair<double, double>> table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::istringstream row(line);
        double angle = 0.0;
        double amp = 0.0;
        if (!(row >> angle >> amp))
            fail(ErrorKind::format, path.string() + ":" + std::to_string(line_no) + ": expected 'angle_deg amplitude'");
        table.emplace_back(angle, amp);
    }
    check_table(table);
    return table;
}

std::pair<double, double> direction_angles(const Vec3& d)
{
    return {std::atan2(d.x(), d.z()), std::atan2(d.y(), std::hypot(d.x(), d.z()))};
}

double pattern_weight(const AntennaPattern& pattern, const Vec3& direction)
{
    const auto [az, el] = direction_angles(direction);
    return pattern.azimuth_shape(az) * pattern.elevation_shape(el);
}

cplx greens(const Vec3& p, const Vec3& q, double wavelength_m)
{
    const double d = (p - q).norm();
    require(d > 0.0, ErrorKind::singularity, "coincident points in Green's function");
    const double phase = two_pi * d / wavelength_m;
    return std::polar(1.0 / d, phase);
}

cplx rs_weight(const Vec3& source, const Vec3& dest, const Vec3& plane_normal, double wavelength_m, bool obliquity)
{
    const Vec3 diff = dest - source;
    const double d = diff.norm();
    require(d > 0.0, ErrorKind::singularity, "coincident points in Rayleigh-Sommerfeld kernel");
    const double cos_chi = obliquity ? plane_normal.normalized().dot(diff) / d : 1.0;
    // 1 / (i lambda) = -i / lambda
    return cplx(0.0, -1.0 / wavelength_m) * cos_chi * std::polar(1.0 / d, two_pi * d / wavelength_m);
}

std::vector<CMatrix> assemble_oneway_many(const std::vector<Vec3>& antennas, double wavelength_m,
                                          const SceneGrid& grid, const RotationSampling& rotation,
                                          const MaskPlaneSampling& plane, const MaskTransmission& transmission,
                                          const AntennaPattern& pattern, bool obliquity)
{
    const std::size_t T = rotation.size();
    const std::size_t N = grid.size();
    const std::size_t M = plane.size();
    const std::size_t A = antennas.size();
    require(transmission.positions() == T, ErrorKind::shape,
            "transmission has " + std::to_string(transmission.positions()) + " rows, rotation has " +
                std::to_string(T));
    require(transmission.samples() == M, ErrorKind::shape,
            "transmission has " + std::to_string(transmission.samples()) + " samples, plane has " +
                std::to_string(M));
    require(N > 0 && T > 0, ErrorKind::shape, "empty scene grid or rotation");

    const double k = two_pi / wavelength_m;
    const double area = plane.cell_area();
    const double background = transmission.background();

    // Antenna-to-sample illumination, pattern included.
    std::vector<cplx> illum(A * M);
    for (std::size_t a = 0; a < A; ++a)
        for (std::size_t m = 0; m < M; ++m)
        {
            const Vec3 d = plane.samples[m] - antennas[a];
            illum[a * M + m] = pattern_weight(pattern, d) * greens(antennas[a], plane.samples[m], wavelength_m) * area;
        }

    // Invert the per-row deviation lists into per-sample (row, weight) lists.
    std::vector<std::size_t> offsets(M + 1, 0);
    for (std::size_t t = 0; t < T; ++t)
        for (const auto& dev : transmission.deviations(t))
            if (dev.value != background)
                ++offsets[dev.sample + 1];
    for (std::size_t m = 0; m < M; ++m)
        offsets[m + 1] += offsets[m];
    std::vector<std::pair<std::uint32_t, double>> hits(offsets[M]);
    {
        std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
        for (std::size_t t = 0; t < T; ++t)
            for (const auto& dev : transmission.deviations(t))
                if (dev.value != background)
                    hits[fill[dev.sample]++] = {static_cast<std::uint32_t>(t), dev.value - background};
    }

    std::vector<Vec3> scene(grid.points.begin(), grid.points.end());
    const cplx prefactor(0.0, -1.0 / wavelength_m);

    // Row-major accumulators: rows[a][t * N + j], plus the open-aperture row per antenna.
    std::vector<std::vector<cplx>> rows(A, std::vector<cplx>(T * N, cplx{}));
    std::vector<std::vector<cplx>> open(A, std::vector<cplx>(N, cplx{}));

    const bool need_open = background != 0.0;

#pragma omp parallel
    {
        std::vector<std::vector<cplx>> local_rows;
        std::vector<std::vector<cplx>> local_open;
        bool private_copy = false;
#ifdef _OPENMP
        private_copy = omp_get_num_threads() > 1;
#endif
        if (private_copy)
        {
            local_rows.assign(A, std::vector<cplx>(T * N, cplx{}));
            local_open.assign(A, std::vector<cplx>(N, cplx{}));
        }
        auto& acc_rows = private_copy ? local_rows : rows;
        auto& acc_open = private_copy ? local_open : open;
        std::vector<cplx> kernel(N);

#pragma omp for schedule(dynamic, 64)
        for (std::ptrdiff_t mi = 0; mi < static_cast<std::ptrdiff_t>(M); ++mi)
        {
            const auto m = static_cast<std::size_t>(mi);
            const bool scattered = offsets[m + 1] > offsets[m];
            if (!scattered && !need_open)
                continue;

            const Vec3& src = plane.samples[m];
            for (std::size_t j = 0; j < N; ++j)
            {
                const double dx = scene[j].x() - src.x();
                const double dy = scene[j].y() - src.y();
                const double dz = scene[j].z() - src.z();
                const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                const double cos_chi = obliquity ? dz / r : 1.0;
                kernel[j] = prefactor * (cos_chi / r) * cplx(std::cos(k * r), std::sin(k * r));
            }

            for (std::size_t a = 0; a < A; ++a)
            {
                const cplx g = illum[a * M + m];
                if (need_open)
                {
                    cplx* dst = acc_open[a].data();
                    for (std::size_t j = 0; j < N; ++j)
                        dst[j] += g * kernel[j];
                }
                for (std::size_t h = offsets[m]; h < offsets[m + 1]; ++h)
                {
                    const cplx c = g * hits[h].second;
                    cplx* dst = acc_rows[a].data() + static_cast<std::size_t>(hits[h].first) * N;
                    for (std::size_t j = 0; j < N; ++j)
                        dst[j] += c * kernel[j];
                }
            }
        }

        if (private_copy)
        {
#pragma omp critical
            for (std::size_t a = 0; a < A; ++a)
            {
                for (std::size_t i = 0; i < T * N; ++i)
                    rows[a][i] += local_rows[a][i];
                for (std::size_t j = 0; j < N; ++j)
                    open[a][j] += local_open[a][j];
            }
        }
    }

    std::vector<CMatrix> out;
    out.reserve(A);
    for (std::size_t a = 0; a < A; ++a)
    {
        CMatrix B(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(N));
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t j = 0; j < N; ++j)
                B(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) =
                    rows[a][t * N + j] + background * open[a][j];
        require(B.allFinite(), ErrorKind::numeric, "non-finite entry in propagation matrix");
        out.push_back(std::move(B));
    }
    return out;
}

PropagationMatrix assemble_oneway(const RadarConfig& radar, const SceneGrid& grid, const MaskGeometry& mask,
                                  const RotationSampling& rotation, const MaskPlaneSampling& plane,
                                  AntennaEnd antenna_end, const MaskTransmission& transmission,
                                  const PropagationOptions& options)
{
    radar.validate();
    mask.validate();
    require(std::abs(plane.depth_m - mask.plane_depth_m) < 1e-12, ErrorKind::shape,
            "mask-plane sampling depth does not match mask geometry");
    const AntennaPattern pattern = options.pattern.value_or(AntennaPattern::from_radar(radar));
    const Vec3 antenna = antenna_end == AntennaEnd::tx ? radar.tx_position : radar.rx_position;
    auto mats = assemble_oneway_many({antenna}, radar.wavelength_m, grid, rotation, plane, transmission, pattern,
                                     options.obliquity);
    PropagationMatrix result;
    result.entries = std::move(mats.front());
    result.direction =
        antenna_end == AntennaEnd::tx ? PropagationDirection::tx_to_scene : PropagationDirection::scene_to_rx;
    return result;
}

} // namespace pinhole
