// SPDX-License-Identifier: Apache-2.0
//
// Binary container, all fields little-endian:
//
//   offset  size  field
//        0     8  magic "PNHLBIN\0"
//        8     4  u32 version (1)
//       12     4  u32 kind: 1 measurements, 2 forward model, 3 factorization
//       16     4  u32 directionality: 0 unidirectional, 1 bidirectional
//       20     4  u32 scalar bytes: 4 (f32) or 8 (f64)
//       24     8  u64 fingerprint
//       32     8  u64 rows
//       40     8  u64 cols
//       48     8  f64 rpm
//       56     8  f64 snr_db
//       64     8  u64 flags: bit 0 set when a truth vector follows
//       72        payload
//
// Payloads hold interleaved (re, im) pairs in column-major order.
//   measurements   y (rows values, cols = 1); with the truth flag, u64 N then N values
//   forward model  B (rows x cols)
//   factorization  u64 K, K f64 singular values, U (rows x K), V (cols x K)
// Measurements and models are written as f32; factorizations as f64 so that cached
// inversions match freshly computed ones.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pinhole/forward.hpp"
#include "pinhole/geometry.hpp"
#include "pinhole/recon.hpp"
#include "pinhole/types.hpp"

namespace pinhole
{

enum class ContainerKind : std::uint32_t
{
    measurements = 1,
    forward_model = 2,
    factorization = 3,
};

struct ContainerHeader
{
    std::uint32_t version = 1;
    ContainerKind kind = ContainerKind::measurements;
    Directionality directionality = Directionality::bidirectional;
    std::uint32_t scalar_bytes = 4;
    std::uint64_t fingerprint = 0;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    double rpm = 0.0;
    double snr_db = 0.0;
    std::uint64_t flags = 0;
};

ContainerHeader read_header(const std::filesystem::path& path);

void write_measurements(const std::filesystem::path& path, const MeasurementSet& ms,
                        Directionality directionality = Directionality::bidirectional);
MeasurementSet read_measurements(const std::filesystem::path& path);

void write_model(const std::filesystem::path& path, const ForwardModel& model);
ForwardModel read_model(const std::filesystem::path& path);

void write_factorization(const std::filesystem::path& path, const SvdFactorization& fact);
SvdFactorization read_factorization(const std::filesystem::path& path);

// Factorization for `model`, read from cache_dir/<fingerprint>.svd when present and written
// there otherwise. An empty cache_dir disables caching.
SvdFactorization cached_factorization(const ForwardModel& model, const std::filesystem::path& cache_dir);

std::string fingerprint_hex(std::uint64_t fingerprint);

// RFC-4180 style CSV: header row, then one row per entry.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

// Columns elevation_deg, azimuth_deg, intensity.
void write_image_csv(const std::filesystem::path& path, const SceneGrid& grid, const Eigen::Ref<const RMatrix>& image);

// Rows row, col, re, im for small matrices.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::Ref<const CMatrix>& m);

// 8-bit binary graymap. Values are peak-normalized and clamped to [floor, 1], then mapped
// linearly onto 0..255.
void write_pgm(const std::filesystem::path& path, const Eigen::Ref<const RMatrix>& image, double floor = 0.1);

} // namespace pinhole
