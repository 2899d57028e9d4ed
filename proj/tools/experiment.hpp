// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinhole/analysis.hpp"
#include "pinhole/forward.hpp"
#include "pinhole/recon.hpp"

namespace pinhole::cli
{

struct GridSpec
{
    double range_m = 20.0;
    double azimuth_min_deg = -50.0;
    double azimuth_max_deg = 50.0;
    double azimuth_step_deg = 0.5;
    std::vector<double> elevation_deg{0.0};
};

struct TargetSpec
{
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    double reflectivity = 1.0;
    double phase_deg = 0.0;
};

struct NoiseSpec
{
    double snr_db = std::numeric_limits<double>::infinity();
    // When set, overrides snr_db: noise leaves this many singular values usable.
    std::optional<std::size_t> usable_singular_values;
};

struct PowerSpec
{
    std::string label;
    double mass_kg = 0.0;
    double radius_m = 0.0;
    double rpm = 600.0;
};

struct AnalysisSpec
{
    double psf_target_deg = 0.0;
    double full_rank_threshold = 1e-5;
    std::string sar_kind; // empty: mask model
    double sar_extent_m = 0.16;
    std::string sweep_parameter = "radius";
    std::vector<double> sweep_values{0.04, 0.08, 0.16};
    std::vector<PowerSpec> power{{"pinhole", 0.010, 0.16, 600.0}, {"sar", 0.120, 0.0225, 600.0}};
};

struct ExperimentConfig
{
    SystemConfig system;
    GridSpec grid;
    double separation_m = 0.01;
    std::optional<Vec3> tx_position;
    std::optional<Vec3> rx_position;
    std::string azimuth_pattern_file;
    std::string elevation_pattern_file;
    double rpm = 600.0;
    std::vector<TargetSpec> targets;
    NoiseSpec noise;
    ReconConfig recon;
    AnalysisSpec analysis;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
};

// Parses and validates a config document. Unknown keys and type errors are reported as
// parameter errors naming the offending field, e.g. "mask.blade_cont: unknown key".
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& cfg);

// FNV-1a of the canonical (sorted-key, compact) serialization.
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Scene vector with each target added at its nearest grid point.
CVector scene_vector(const ExperimentConfig& cfg);

} // namespace pinhole::cli
