// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pinhole/analysis.hpp"
#include "pinhole/error.hpp"

namespace pinhole
{

namespace
{

void require_same_shape(const Eigen::Ref<const RMatrix>& a, const Eigen::Ref<const RMatrix>& b)
{
    require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::shape,
            "image shapes differ: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

} // namespace

double high_frequency_content(const Eigen::Ref<const RMatrix>& image, double min_frequency)
{
    require(image.size() > 0, ErrorKind::shape, "empty image");
    // The zero elevation-frequency row of the 2-D DFT is the 1-D DFT of the column sums.
    const RVector col_sum = image.colwise().sum().transpose();
    const Eigen::Index n = col_sum.size();
    double total = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
    {
        // Bin k sits at k/n cycles/bin, folded into [-0.5, 0.5).
        const double f = k < (n + 1) / 2 ? static_cast<double>(k) / n : static_cast<double>(k - n) / n;
        if (f < min_frequency)
            continue;
        cplx acc(0.0, 0.0);
        for (Eigen::Index a = 0; a < n; ++a)
            acc += col_sum[a] * std::polar(1.0, -two_pi * static_cast<double>((k * a) % n) / n);
        total += std::abs(acc);
    }
    return total;
}

double sharpness(const Eigen::Ref<const RMatrix>& image, const Eigen::Ref<const RMatrix>& reference)
{
    require_same_shape(image, reference);
    const double ref = high_frequency_content(reference);
    // Rounding leaves ~1e-14 of "content" in a flat image; measure against its DC term.
    require(ref > 1e-10 * std::abs(reference.sum()) && ref > 0.0, ErrorKind::undefined_metric, "reference image has no high-frequency azimuth content");
    return high_frequency_content(image) / ref;
}

double mse(const Eigen::Ref<const RMatrix>& image, const Eigen::Ref<const RMatrix>& reference, double window_lo,
           double window_hi)
{
    require_same_shape(image, reference);
    double acc = 0.0;
    std::size_t count = 0;
    for (Eigen::Index j = 0; j < image.cols(); ++j)
        for (Eigen::Index i = 0; i < image.rows(); ++i)
        {
            const double r = reference(i, j);
            if (r < window_lo || r > window_hi)
                continue;
            const double d = image(i, j) - r;
            acc += d * d;
            ++count;
        }
    require(count > 0, ErrorKind::undefined_metric, "no reference pixel lies inside the intensity window");
    return 1e3 * acc / static_cast<double>(count);
}

double ssim(const Eigen::Ref<const RMatrix>& image, const Eigen::Ref<const RMatrix>& reference)
{
    require_same_shape(image, reference);
    constexpr Eigen::Index w = 8;
    require(image.rows() >= w && image.cols() >= w, ErrorKind::parameter, "image is smaller than the 8x8 window");
    constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
    constexpr double inv = 1.0 / (w * w);

    double total = 0.0;
    std::size_t windows = 0;
    for (Eigen::Index i = 0; i + w <= image.rows(); ++i)
        for (Eigen::Index j = 0; j + w <= image.cols(); ++j)
        {
            const auto x = image.block(i, j, w, w);
            const auto y = reference.block(i, j, w, w);
            const double mx = x.sum() * inv;
            const double my = y.sum() * inv;
            const double vx = (x.array() - mx).square().sum() * inv;
            const double vy = (y.array() - my).square().sum() * inv;
            const double cxy = ((x.array() - mx) * (y.array() - my)).sum() * inv;
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++windows;
        }
    return total / static_cast<double>(windows);
}

double chamfer(const std::vector<Point2>& a, const std::vector<Point2>& b)
{
    require(!a.empty() && !b.empty(), ErrorKind::undefined_metric, "chamfer distance needs two non-empty sets");
    auto directed = [](const std::vector<Point2>& from, const std::vector<Point2>& to) {
        double sum = 0.0;
        for (const auto& p : from)
        {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to)
                best = std::min(best, std::hypot(p[0] - q[0], p[1] - q[1]));
            sum += best;
        }
        return sum / static_cast<double>(from.size());
    };
    return 0.5 * (directed(a, b) + directed(b, a));
}

std::vector<Point2> image_points(const Eigen::Ref<const RMatrix>& image, const SceneGrid& grid, double fraction)
{
    require(static_cast<std::size_t>(image.rows()) == grid.elevation_count() &&
                static_cast<std::size_t>(image.cols()) == grid.azimuth_count(),
            ErrorKind::shape, "image does not match the scene grid");
    std::vector<Point2> pts;
    const double peak = image.size() ? image.maxCoeff() : 0.0;
    if (peak > 0.0)
        for (Eigen::Index e = 0; e < image.rows(); ++e)
            for (Eigen::Index a = 0; a < image.cols(); ++a)
                if (image(e, a) >= fraction * peak)
                {
                    const double az = deg2rad(grid.azimuth_deg[static_cast<std::size_t>(a)]);
                    pts.push_back({grid.range_m * std::sin(az), grid.range_m * std::cos(az)});
                }
    require(!pts.empty(), ErrorKind::undefined_metric, "no pixel survives the chamfer threshold");
    return pts;
}

MetricReport compare_images(const Eigen::Ref<const RMatrix>& image, const Eigen::Ref<const RMatrix>& reference,
                            const SceneGrid& grid)
{
    MetricReport r;
    r.sharpness_ratio = sharpness(image, reference);
    r.mse = mse(image, reference);
    // Single-row azimuth cuts are too small for the SSIM window.
    r.ssim = image.rows() >= 8 && image.cols() >= 8 ? ssim(image, reference)
                                                    : std::numeric_limits<double>::quiet_NaN();
    r.chamfer_m = chamfer(image_points(image, grid), image_points(reference, grid));
    return r;
}

} // namespace pinhole
