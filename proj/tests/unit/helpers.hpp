// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include <gtest/gtest.h>

#include "pinhole/error.hpp"
#include "pinhole/forward.hpp"

namespace pinhole::test
{

// A few hundred thousand entries at most; every unit test should build in milliseconds.
inline SystemConfig small_system(MaskMode mode = MaskMode::inverse_pinhole,
                                 Directionality dir = Directionality::bidirectional)
{
    SystemConfig cfg;
    cfg.grid = build_scene_grid(20.0, -30.0, 30.0, 5.0);
    cfg.rotation = make_rotation(48);
    cfg.mask.blade_length_m = 0.03;
    cfg.mask.blade_width_m = 0.006;
    cfg.mask.plane_depth_m = 0.03;
    cfg.mask.axis_offset_m = 0.03;
    cfg.mask.mode = mode;
    cfg.radar = make_radar(0.03);
    cfg.directionality = dir;
    return cfg;
}

inline CMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = cplx(n(rng), n(rng));
    return m;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir
{
public:
    TempDir()
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("pinhole-unit-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace pinhole::test

#define EXPECT_PINHOLE_ERROR(stmt, expected_kind)                                                                   \
    do                                                                                                             \
    {                                                                                                              \
        try                                                                                                        \
        {                                                                                                          \
            stmt;                                                                                                  \
            ADD_FAILURE() << "no exception from " #stmt;                                                           \
        }                                                                                                          \
        catch (const ::pinhole::Error& e)                                                                          \
        {                                                                                                          \
            EXPECT_EQ(e.kind(), expected_kind) << e.what();                                                        \
        }                                                                                                          \
    } while (0)
