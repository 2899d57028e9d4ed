// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "pinhole/geometry.hpp"
#include "pinhole/types.hpp"

namespace pinhole
{

struct ForwardModel;

// One-way power attenuation of common blocker materials, in dB.
inline constexpr double pla_attenuation_db = 9.0;
inline constexpr double metal_strip_attenuation_db = 12.0;
inline constexpr double absorber_attenuation_db = 30.0;

// Looks up "pla", "metal", "absorber" or "ideal" (infinite attenuation).
double material_attenuation_db(std::string_view material);

struct MaskOptions
{
    // Raised-cosine taper, half a cell wide, across footprint boundaries.
    bool soft_edges = false;
};

// Time-variant mask transmission T_t(m) over rotation positions t and mask-plane samples m.
//
// Stored as a background value plus, per rotation position, the samples whose value differs
// from it. A dense T x M table for the default geometry would hold ~3e7 entries while the
// blade footprint touches only a few hundred samples per row.
class MaskTransmission
{
public:
    struct Deviation
    {
        std::uint32_t sample;
        double value;
    };

    MaskTransmission() = default;
    MaskTransmission(MaskMode mode, double base_attenuation_amp, double background, std::size_t samples,
                     std::vector<std::vector<Deviation>> rows);

    // Every entry equal to value: 1 gives the all-open mask O, 0 a fully opaque screen.
    static MaskTransmission uniform(std::size_t positions, std::size_t samples, double value,
                                    MaskMode mode = MaskMode::inverse_pinhole);

    MaskMode mode() const { return mode_; }
    double base_attenuation_amp() const { return base_amp_; }
    double background() const { return background_; }
    std::size_t positions() const { return rows_.size(); }
    std::size_t samples() const { return samples_; }

    const std::vector<Deviation>& deviations(std::size_t t) const { return rows_.at(t); }
    double value(std::size_t t, std::size_t m) const;

    // Dense T x M table. Intended for small instances and tests.
    RMatrix dense() const;

private:
    MaskMode mode_ = MaskMode::inverse_pinhole;
    double base_amp_ = 0.0;
    double background_ = 1.0;
    std::size_t samples_ = 0;
    std::vector<std::vector<Deviation>> rows_; // sorted by sample index
};

// Hole follows the blade: 1 inside the footprint, base leakage outside
// (0 for infinite attenuation).
MaskTransmission regular_pinhole(const MaskGeometry& mask, const RotationSampling& rotation,
                                 const MaskPlaneSampling& plane, const MaskOptions& options = {});

// Blocker on the blade: base_attenuation_amp inside the footprint, 1 outside.
MaskTransmission inverse_pinhole(const MaskGeometry& mask, const RotationSampling& rotation,
                                 const MaskPlaneSampling& plane, const MaskOptions& options = {});

// The all-open matrix O.
MaskTransmission open_mask(const RotationSampling& rotation, const MaskPlaneSampling& plane);

// Dispatches on mask.mode.
MaskTransmission make_transmission(const MaskGeometry& mask, const RotationSampling& rotation,
                                   const MaskPlaneSampling& plane, const MaskOptions& options = {});

struct NullSignature
{
    RVector magnitude;           // |B e_target| over rotation positions
    std::vector<std::size_t> nulls; // index of the deepest sample in each null
    double median = 0.0;
    double dip_db = 0.0;         // median over deepest null, in dB (power)
    std::size_t count() const { return nulls.size(); }
};

// Per-rotation magnitude trace of one scene column. A null is a contiguous (circular) run of
// samples below threshold_ratio * median.
NullSignature null_signature(const ForwardModel& model, std::size_t target_index, double threshold_ratio = 0.5);
NullSignature null_signature(const Eigen::Ref<const CVector>& column, double threshold_ratio = 0.5);

} // namespace pinhole
