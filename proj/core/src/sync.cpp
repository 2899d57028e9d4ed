// SPDX-License-Identifier: Apache-2.0
#include "pinhole/sync.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "pinhole/error.hpp"
#include "pinhole/mask.hpp"
#include "pinhole/propagation.hpp"

namespace pinhole
{

RotationSampling warped_rotation(const std::vector<double>& speed_rpm, std::size_t positions_per_rotation,
                                 double nominal_rpm)
{
    require(positions_per_rotation > 0 && nominal_rpm > 0.0, ErrorKind::parameter,
            "positions and nominal rpm must be positive");
    RotationSampling rot;
    rot.positions_per_rotation = positions_per_rotation;
    rot.angles_rad.reserve(speed_rpm.size());
    const double step = two_pi / static_cast<double>(positions_per_rotation);
    double theta = 0.0;
    for (double rpm : speed_rpm)
    {
        require(rpm > 0.0 && std::isfinite(rpm), ErrorKind::parameter, "rotation speeds must be positive");
        rot.angles_rad.push_back(theta);
        theta += step * rpm / nominal_rpm;
    }
    return rot;
}

RotationSignature synth_signature(const RadarConfig& radar, const MaskGeometry& mask, const RotationSampling& rotation,
                                  double plane_spacing_m)
{
    radar.validate();
    const auto plane = make_plane_sampling(radar, mask, plane_spacing_m);
    const auto transmission = make_transmission(mask, rotation, plane);
    const AntennaPattern pattern = AntennaPattern::from_radar(radar);

    // Round-trip weight of each mask-plane sample.
    CVector g(static_cast<Eigen::Index>(plane.size()));
    for (std::size_t m = 0; m < plane.size(); ++m)
    {
        const Vec3& p = plane.samples[m];
        g[static_cast<Eigen::Index>(m)] = pattern_weight(pattern, p - radar.tx_position) *
                                          pattern_weight(pattern, p - radar.rx_position) *
                                          greens(radar.tx_position, p, radar.wavelength_m) *
                                          greens(p, radar.rx_position, radar.wavelength_m) * plane.cell_area();
    }
    const double bg = transmission.background();
    const cplx base = (1.0 - bg) * g.sum();

    RotationSignature sig;
    sig.nominal_period_samples = rotation.positions_per_rotation;
    sig.samples.resize(static_cast<Eigen::Index>(rotation.size()));
    for (std::size_t t = 0; t < rotation.size(); ++t)
    {
        cplx acc = base;
        for (const auto& d : transmission.deviations(t))
            acc += (bg - d.value) * g[static_cast<Eigen::Index>(d.sample)];
        sig.samples[static_cast<Eigen::Index>(t)] = std::abs(acc);
    }
    return sig;
}

RotationSignature synth_signature(const RadarConfig& radar, const MaskGeometry& mask,
                                  const std::vector<double>& speed_rpm, std::size_t positions_per_rotation,
                                  double nominal_rpm, double plane_spacing_m)
{
    return synth_signature(radar, mask, warped_rotation(speed_rpm, positions_per_rotation, nominal_rpm),
                           plane_spacing_m);
}

namespace
{

struct BandedTable
{
    std::size_t rows;
    std::size_t cols;
    std::size_t radius;
    std::vector<double> cost;

    bool inside(std::size_t i, std::size_t j) const { return (i > j ? i - j : j - i) <= radius && j < cols; }
    double& at(std::size_t i, std::size_t j) { return cost[i * (2 * radius + 1) + (j + radius - i)]; }
    double get(std::size_t i, std::size_t j) const
    {
        return inside(i, j) ? cost[i * (2 * radius + 1) + (j + radius - i)] : std::numeric_limits<double>::infinity();
    }
};

BandedTable accumulate(const Eigen::Ref<const RVector>& a, const Eigen::Ref<const RVector>& b,
                       const DtwOptions& options)
{
    const auto n = static_cast<std::size_t>(a.size());
    const auto m = static_cast<std::size_t>(b.size());
    require(n > 0 && m > 0, ErrorKind::alignment, "cannot align empty signatures");
    require(options.band_fraction > 0.0, ErrorKind::parameter, "band fraction must be positive");
    const std::size_t radius = options.band_fraction >= 1.0
                                   ? std::max(n, m)
                                   : static_cast<std::size_t>(std::ceil(options.band_fraction * static_cast<double>(n)));
    const std::size_t diff = n > m ? n - m : m - n;
    require(diff <= radius, ErrorKind::alignment,
            "signature lengths " + std::to_string(n) + " and " + std::to_string(m) +
                " differ by more than the warping band of " + std::to_string(radius) + " samples");

    BandedTable t{n, m, radius, std::vector<double>(n * (2 * radius + 1), std::numeric_limits<double>::infinity())};
    for (std::size_t i = 0; i < n; ++i)
    {
        const std::size_t j0 = i > radius ? i - radius : 0;
        const std::size_t j1 = std::min(m - 1, i + radius);
        for (std::size_t j = j0; j <= j1; ++j)
        {
            const double d = a[static_cast<Eigen::Index>(i)] - b[static_cast<Eigen::Index>(j)];
            double best;
            if (i == 0 && j == 0)
                best = 0.0;
            else
            {
                best = std::numeric_limits<double>::infinity();
                if (i > 0 && j > 0)
                    best = std::min(best, t.get(i - 1, j - 1));
                if (i > 0)
                    best = std::min(best, t.get(i - 1, j));
                if (j > 0)
                    best = std::min(best, t.get(i, j - 1));
            }
            t.at(i, j) = d * d + best;
        }
    }
    return t;
}

} // namespace

double dtw_cost(const Eigen::Ref<const RVector>& a, const Eigen::Ref<const RVector>& b, const DtwOptions& options)
{
    const auto t = accumulate(a, b, options);
    return t.get(t.rows - 1, t.cols - 1);
}

WarpPath dtw_align(const RotationSignature& templ, const RotationSignature& observed, const DtwOptions& options)
{
    const auto t = accumulate(templ.samples, observed.samples, options);
    WarpPath path;
    path.cost = t.get(t.rows - 1, t.cols - 1);
    std::size_t i = t.rows - 1;
    std::size_t j = t.cols - 1;
    path.pairs.emplace_back(i, j);
    while (i > 0 || j > 0)
    {
        // Prefer the diagonal on ties so identical inputs give the identity path.
        const double diag = i > 0 && j > 0 ? t.get(i - 1, j - 1) : std::numeric_limits<double>::infinity();
        const double up = i > 0 ? t.get(i - 1, j) : std::numeric_limits<double>::infinity();
        const double left = j > 0 ? t.get(i, j - 1) : std::numeric_limits<double>::infinity();
        if (diag <= up && diag <= left)
        {
            --i;
            --j;
        }
        else if (up <= left)
            --i;
        else
            --j;
        path.pairs.emplace_back(i, j);
    }
    std::reverse(path.pairs.begin(), path.pairs.end());
    return path;
}

std::vector<double> warp_positions(const WarpPath& path, std::size_t template_length, std::size_t smoothing)
{
    require(!path.pairs.empty(), ErrorKind::interpolation, "empty warp path");
    require(path.pairs.front() == std::make_pair<std::size_t, std::size_t>(0, 0), ErrorKind::interpolation,
            "warp path does not start at (0, 0)");
    for (std::size_t k = 1; k < path.pairs.size(); ++k)
    {
        const auto [i0, j0] = path.pairs[k - 1];
        const auto [i1, j1] = path.pairs[k];
        const bool ok = i1 >= i0 && j1 >= j0 && i1 - i0 <= 1 && j1 - j0 <= 1 && (i1 != i0 || j1 != j0);
        require(ok, ErrorKind::interpolation, "warp path has a gap at step " + std::to_string(k));
    }
    require(path.pairs.back().first + 1 == template_length, ErrorKind::interpolation,
            "warp path does not cover the template");

    // Mean observed index per template index.
    std::vector<double> mean(template_length, 0.0);
    std::vector<std::size_t> count(template_length, 0);
    for (const auto& [i, j] : path.pairs)
    {
        mean[i] += static_cast<double>(j);
        ++count[i];
    }
    for (std::size_t i = 0; i < template_length; ++i)
        mean[i] /= static_cast<double>(count[i]);

    // Collapse plateaus to one anchor at their centre, then interpolate between anchors.
    std::vector<std::pair<double, double>> anchors;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= template_length; ++i)
        if (i == template_length || mean[i] != mean[start])
        {
            const bool edge = start == 0 || i == template_length;
            const double at = edge ? (start == 0 ? 0.0 : static_cast<double>(template_length - 1))
                                   : 0.5 * static_cast<double>(start + i - 1);
            anchors.emplace_back(at, mean[start]);
            start = i;
        }
    if (anchors.size() == 1)
        return std::vector<double>(template_length, anchors.front().second);

    std::vector<double> out(template_length);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < template_length; ++i)
    {
        const double x = static_cast<double>(i);
        while (seg + 2 < anchors.size() && anchors[seg + 1].first <= x)
            ++seg;
        const auto [x0, y0] = anchors[seg];
        const auto [x1, y1] = anchors[seg + 1];
        out[i] = x1 > x0 ? y0 + (x - x0) * (y1 - y0) / (x1 - x0) : y0;
    }
    if (smoothing < 2)
        return out;

    std::vector<double> prefix(template_length + 1, 0.0);
    for (std::size_t i = 0; i < template_length; ++i)
        prefix[i + 1] = prefix[i] + out[i];
    std::vector<double> smooth(template_length);
    for (std::size_t i = 0; i < template_length; ++i)
    {
        const std::size_t h = std::min({smoothing / 2, i, template_length - 1 - i});
        smooth[i] = (prefix[i + h + 1] - prefix[i - h]) / static_cast<double>(2 * h + 1);
    }
    return smooth;
}

MeasurementSet resample_to_uniform(const MeasurementSet& y, const WarpPath& path, std::size_t smoothing)
{
    require(!path.pairs.empty(), ErrorKind::interpolation, "empty warp path");
    const std::size_t templ_len = path.pairs.back().first + 1;
    const std::size_t obs_len = path.pairs.back().second + 1;
    require(static_cast<std::size_t>(y.y.size()) == obs_len, ErrorKind::interpolation,
            "warp path spans " + std::to_string(obs_len) + " observed samples but the measurement holds " +
                std::to_string(y.y.size()));
    const auto pos = warp_positions(path, templ_len, smoothing);

    MeasurementSet out = y;
    out.y.resize(static_cast<Eigen::Index>(templ_len));
    for (std::size_t i = 0; i < templ_len; ++i)
    {
        const double p = std::clamp(pos[i], 0.0, static_cast<double>(obs_len - 1));
        const auto lo = static_cast<std::size_t>(std::floor(p));
        const std::size_t hi = std::min(lo + 1, obs_len - 1);
        const double f = p - static_cast<double>(lo);
        out.y[static_cast<Eigen::Index>(i)] =
            (1.0 - f) * y.y[static_cast<Eigen::Index>(lo)] + f * y.y[static_cast<Eigen::Index>(hi)];
    }
    out.truth.reset();
    return out;
}

RotationSignature log_compress(const RotationSignature& sig, double floor_ratio)
{
    require(floor_ratio > 0.0, ErrorKind::parameter, "floor_ratio must be positive");
    RotationSignature out = sig;
    const double peak = sig.samples.size() ? sig.samples.maxCoeff() : 0.0;
    if (peak > 0.0)
        out.samples = (sig.samples.array() / (floor_ratio * peak)).log1p();
    return out;
}

RotationSignature load_signature_csv(const std::filesystem::path& path, std::size_t nominal_period_samples)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::io, "cannot open " + path.string());
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        std::istringstream ss(line.substr(first));
        double v = 0.0;
        std::string rest;
        if (!(ss >> v) || (ss >> rest && rest != ","))
            fail(ErrorKind::format, path.string() + ":" + std::to_string(lineno) + ": expected one magnitude");
        require(v >= 0.0 && std::isfinite(v), ErrorKind::format,
                path.string() + ":" + std::to_string(lineno) + ": magnitude must be finite and non-negative");
        values.push_back(v);
    }
    RotationSignature sig;
    sig.samples = Eigen::Map<const RVector>(values.data(), static_cast<Eigen::Index>(values.size()));
    sig.nominal_period_samples = nominal_period_samples;
    return sig;
}

} // namespace pinhole
