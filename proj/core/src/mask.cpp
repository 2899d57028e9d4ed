// SPDX-License-Identifier: Apache-2.0
#include "pinhole/mask.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pinhole/error.hpp"
#include "pinhole/forward.hpp"

namespace pinhole
{

double material_attenuation_db(std::string_view material)
{
    if (material == "pla")
        return pla_attenuation_db;
    if (material == "metal")
        return metal_strip_attenuation_db;
    if (material == "absorber")
        return absorber_attenuation_db;
    if (material == "ideal")
        return std::numeric_limits<double>::infinity();
    fail(ErrorKind::parameter, "unknown blocker material '" + std::string(material) + "'");
}

MaskTransmission::MaskTransmission(MaskMode mode, double base_attenuation_amp, double background,
                                   std::size_t samples, std::vector<std::vector<Deviation>> rows)
    : mode_(mode), base_amp_(base_attenuation_amp), background_(background), samples_(samples), rows_(std::move(rows))
{
    require(background_ >= 0.0 && background_ <= 1.0, ErrorKind::parameter, "transmission must lie in [0, 1]");
    for (auto& row : rows_)
    {
        std::sort(row.begin(), row.end(), [](const Deviation& a, const Deviation& b) { return a.sample < b.sample; });
        for (const auto& dev : row)
        {
            require(dev.sample < samples_, ErrorKind::shape, "deviation sample index out of range");
            require(dev.value >= 0.0 && dev.value <= 1.0, ErrorKind::parameter, "transmission must lie in [0, 1]");
        }
    }
}

MaskTransmission MaskTransmission::uniform(std::size_t positions, std::size_t samples, double value, MaskMode mode)
{
    return MaskTransmission(mode, 0.0, value, samples, std::vector<std::vector<Deviation>>(positions));
}

double MaskTransmission::value(std::size_t t, std::size_t m) const
{
    require(m < samples_, ErrorKind::shape, "sample index out of range");
    const auto& row = rows_.at(t);
    auto it = std::lower_bound(row.begin(), row.end(), m,
                               [](const Deviation& d, std::size_t s) { return d.sample < s; });
    if (it != row.end() && it->sample == m)
        return it->value;
    return background_;
}

RMatrix MaskTransmission::dense() const
{
    RMatrix out = RMatrix::Constant(static_cast<Eigen::Index>(rows_.size()), static_cast<Eigen::Index>(samples_),
                                    background_);
    for (std::size_t t = 0; t < rows_.size(); ++t)
        for (const auto& dev : rows_[t])
            out(static_cast<Eigen::Index>(t), dev.sample) = dev.value;
    return out;
}

namespace
{

// Fraction of a sample considered inside the footprint.
double coverage(double signed_distance, double spacing, bool soft_edges)
{
    if (!soft_edges)
        return signed_distance >= 0.0 ? 1.0 : 0.0;
    const double w = spacing / 2.0;
    if (signed_distance >= w / 2.0)
        return 1.0;
    if (signed_distance <= -w / 2.0)
        return 0.0;
    return 0.5 * (1.0 + std::sin(pi * signed_distance / w));
}

MaskTransmission footprint_transmission(const MaskGeometry& mask, const RotationSampling& rotation,
                                        const MaskPlaneSampling& plane, const MaskOptions& options, MaskMode mode,
                                        double inside, double outside)
{
    mask.validate();
    require(std::abs(plane.depth_m - mask.plane_depth_m) < 1e-12, ErrorKind::shape,
            "mask-plane sampling depth does not match mask geometry");

    // Only samples within reach of a blade can ever deviate from the background.
    const double reach = mask.blade_length_m + plane.spacing_m;
    std::vector<std::uint32_t> candidates;
    for (std::size_t m = 0; m < plane.size(); ++m)
        if (std::hypot(plane.samples[m].x(), plane.samples[m].y()) <= reach)
            candidates.push_back(static_cast<std::uint32_t>(m));

    std::vector<std::vector<MaskTransmission::Deviation>> rows(rotation.size());
    for (std::size_t t = 0; t < rotation.size(); ++t)
    {
        const BladeFootprint fp(mask, rotation.angles_rad[t]);
        auto& row = rows[t];
        for (auto m : candidates)
        {
            const auto& p = plane.samples[m];
            const double f = coverage(fp.signed_distance(p.x(), p.y()), plane.spacing_m, options.soft_edges);
            if (f > 0.0)
                row.push_back({m, outside + f * (inside - outside)});
        }
    }
    return MaskTransmission(mode, db_to_amplitude(mask.attenuation_db), outside, plane.size(), std::move(rows));
}

} // namespace

MaskTransmission regular_pinhole(const MaskGeometry& mask, const RotationSampling& rotation,
                                 const MaskPlaneSampling& plane, const MaskOptions& options)
{
    require(mask.mode == MaskMode::regular_pinhole, ErrorKind::parameter, "regular_pinhole needs a regular-mode mask");
    return footprint_transmission(mask, rotation, plane, options, MaskMode::regular_pinhole, 1.0,
                                  db_to_amplitude(mask.attenuation_db));
}

MaskTransmission inverse_pinhole(const MaskGeometry& mask, const RotationSampling& rotation,
                                 const MaskPlaneSampling& plane, const MaskOptions& options)
{
    require(mask.mode == MaskMode::inverse_pinhole, ErrorKind::parameter, "inverse_pinhole needs an inverse-mode mask");
    return footprint_transmission(mask, rotation, plane, options, MaskMode::inverse_pinhole,
                                  db_to_amplitude(mask.attenuation_db), 1.0);
}

MaskTransmission open_mask(const RotationSampling& rotation, const MaskPlaneSampling& plane)
{
    return MaskTransmission::uniform(rotation.size(), plane.size(), 1.0);
}

MaskTransmission make_transmission(const MaskGeometry& mask, const RotationSampling& rotation,
                                   const MaskPlaneSampling& plane, const MaskOptions& options)
{
    return mask.mode == MaskMode::regular_pinhole ? regular_pinhole(mask, rotation, plane, options)
                                                  : inverse_pinhole(mask, rotation, plane, options);
}

NullSignature null_signature(const Eigen::Ref<const CVector>& column, double threshold_ratio)
{
    NullSignature sig;
    const auto T = static_cast<std::size_t>(column.size());
    require(T > 0, ErrorKind::shape, "empty signature");
    sig.magnitude = column.cwiseAbs();

    std::vector<double> sorted(sig.magnitude.data(), sig.magnitude.data() + T);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(T / 2), sorted.end());
    sig.median = sorted[T / 2];
    const double threshold = threshold_ratio * sig.median;

    auto below = [&](std::size_t t) { return sig.magnitude[static_cast<Eigen::Index>(t)] < threshold; };

    // Start scanning just after a sample above threshold so circular runs are not split.
    std::size_t start = T;
    for (std::size_t t = 0; t < T; ++t)
        if (!below(t))
        {
            start = t;
            break;
        }
    double deepest = sig.median;
    if (start == T)
    {
        // Entire trace below threshold: treat as one null.
        Eigen::Index idx = 0;
        deepest = sig.magnitude.minCoeff(&idx);
        sig.nulls.push_back(static_cast<std::size_t>(idx));
    }
    else
    {
        bool in_run = false;
        std::size_t run_min = 0;
        for (std::size_t i = 1; i <= T; ++i)
        {
            const std::size_t t = (start + i) % T;
            if (below(t))
            {
                if (!in_run || sig.magnitude[static_cast<Eigen::Index>(t)] <
                                   sig.magnitude[static_cast<Eigen::Index>(run_min)])
                    run_min = t;
                in_run = true;
            }
            else if (in_run)
            {
                sig.nulls.push_back(run_min);
                deepest = std::min(deepest, sig.magnitude[static_cast<Eigen::Index>(run_min)]);
                in_run = false;
            }
        }
    }
    std::sort(sig.nulls.begin(), sig.nulls.end());
    if (!sig.nulls.empty() && sig.median > 0.0)
        sig.dip_db = deepest > 0.0 ? 20.0 * std::log10(sig.median / deepest) : std::numeric_limits<double>::infinity();
    return sig;
}

NullSignature null_signature(const ForwardModel& model, std::size_t target_index, double threshold_ratio)
{
    require(target_index < static_cast<std::size_t>(model.B.cols()), ErrorKind::parameter,
            "target index outside scene grid");
    return null_signature(model.B.col(static_cast<Eigen::Index>(target_index)), threshold_ratio);
}

} // namespace pinhole
