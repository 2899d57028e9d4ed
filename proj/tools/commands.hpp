// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pinhole::cli
{

// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_mismatch = 3;
inline constexpr int exit_numeric = 4;

struct SimulateArgs
{
    std::filesystem::path config;
    std::optional<std::filesystem::path> output_dir;
    std::filesystem::path cache_dir;
    bool save_model = false;
};

struct ReconstructArgs
{
    std::filesystem::path measurements;
    std::filesystem::path config;
    std::optional<std::filesystem::path> model;
    std::vector<std::size_t> sigma_max; // empty: config value
    std::optional<std::string> reference; // "truth" or an image CSV
    std::optional<std::filesystem::path> output_dir;
    std::filesystem::path cache_dir;
};

struct AnalyzeArgs
{
    std::string subcommand; // svd | psf | sweep | power
    std::optional<std::filesystem::path> config;
    std::optional<std::filesystem::path> output_dir;
    std::filesystem::path cache_dir;
    std::optional<std::string> sar_kind;
    std::optional<double> sar_extent_m;
    std::optional<std::size_t> sigma_max;
};

// Each command writes its outputs and returns an exit code; progress goes to `log`.
int cmd_simulate(const SimulateArgs& args, std::ostream& log);
int cmd_reconstruct(const ReconstructArgs& args, std::ostream& log);
int cmd_analyze(const AnalyzeArgs& args, std::ostream& log);

// Runs `body`, mapping library and JSON errors to exit codes and reporting them on `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

} // namespace pinhole::cli
