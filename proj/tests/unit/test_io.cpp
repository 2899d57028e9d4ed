// SPDX-License-Identifier: Apache-2.0
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "pinhole/io.hpp"

using namespace pinhole;
using pinhole::test::random_complex;
using pinhole::test::TempDir;

namespace
{

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(Io, MeasurementsRoundTrip)
{
    TempDir dir;
    MeasurementSet ms;
    ms.y = random_complex(33, 1, 1);
    ms.truth = CVector(random_complex(7, 1, 2));
    ms.rpm = 540.0;
    ms.snr_db = 25.0;
    ms.fingerprint = 0x1234abcdULL;
    write_measurements(dir / "m.bin", ms, Directionality::unidirectional);

    const auto h = read_header(dir / "m.bin");
    EXPECT_EQ(h.kind, ContainerKind::measurements);
    EXPECT_EQ(h.directionality, Directionality::unidirectional);
    EXPECT_EQ(h.scalar_bytes, 4u);
    EXPECT_EQ(h.rows, 33u);
    EXPECT_EQ(h.flags & 1u, 1u);
    EXPECT_EQ(std::filesystem::file_size(dir / "m.bin"), 72u + 33u * 8u + 8u + 7u * 8u);

    const auto back = read_measurements(dir / "m.bin");
    EXPECT_LT((back.y - ms.y).cwiseAbs().maxCoeff(), 1e-6 * ms.y.cwiseAbs().maxCoeff());
    ASSERT_TRUE(back.truth.has_value());
    EXPECT_LT((*back.truth - *ms.truth).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_EQ(back.fingerprint, ms.fingerprint);
    EXPECT_DOUBLE_EQ(back.rpm, 540.0);
    EXPECT_DOUBLE_EQ(back.snr_db, 25.0);
}

TEST(Io, InfiniteSnrSurvives)
{
    TempDir dir;
    MeasurementSet ms;
    ms.y = CVector::Ones(3);
    write_measurements(dir / "m.bin", ms);
    EXPECT_TRUE(std::isinf(read_measurements(dir / "m.bin").snr_db));
    EXPECT_FALSE(read_measurements(dir / "m.bin").truth.has_value());
}

TEST(Io, ModelAndFactorizationRoundTrip)
{
    TempDir dir;
    ForwardModel m;
    m.B = random_complex(12, 5, 3);
    m.fingerprint = 77;
    m.directionality = Directionality::unidirectional;
    write_model(dir / "b.bin", m);
    const auto mb = read_model(dir / "b.bin");
    EXPECT_EQ(mb.fingerprint, 77u);
    EXPECT_EQ(mb.directionality, Directionality::unidirectional);
    EXPECT_LT((mb.B - m.B).cwiseAbs().maxCoeff(), 1e-6);

    const auto f = factorize(m.B, 77);
    write_factorization(dir / "f.svd", f);
    const auto fb = read_factorization(dir / "f.svd");
    EXPECT_EQ(fb.fingerprint, 77u);
    EXPECT_EQ((fb.S - f.S).norm(), 0.0);
    EXPECT_EQ((fb.U - f.U).norm(), 0.0);
    EXPECT_EQ((fb.V - f.V).norm(), 0.0);
    EXPECT_PINHOLE_ERROR(read_model(dir / "f.svd"), ErrorKind::format);
}

TEST(Io, CorruptFilesAreFormatErrors)
{
    TempDir dir;
    {
        std::ofstream out(dir / "junk.bin", std::ios::binary);
        out << "not a container at all, just some bytes that are long enough to fill a header......";
    }
    EXPECT_PINHOLE_ERROR(read_header(dir / "junk.bin"), ErrorKind::format);

    MeasurementSet ms;
    ms.y = CVector::Ones(50);
    write_measurements(dir / "m.bin", ms);
    std::filesystem::resize_file(dir / "m.bin", 100);
    EXPECT_PINHOLE_ERROR(read_measurements(dir / "m.bin"), ErrorKind::format);
    EXPECT_PINHOLE_ERROR(read_measurements(dir / "absent.bin"), ErrorKind::io);
}

TEST(Io, FactorizationCache)
{
    TempDir dir;
    ForwardModel m;
    m.B = random_complex(10, 6, 4);
    m.fingerprint = 0xfeedULL;
    const auto a = cached_factorization(m, dir.path());
    const auto file = dir / (fingerprint_hex(0xfeedULL) + ".svd");
    ASSERT_TRUE(std::filesystem::exists(file));
    // A second call must come from disk: poison the matrix and compare.
    ForwardModel poisoned = m;
    poisoned.B.setZero();
    const auto b = cached_factorization(poisoned, dir.path());
    EXPECT_EQ((a.S - b.S).norm(), 0.0);
    EXPECT_EQ(fingerprint_hex(0xfeedULL), "000000000000feed");
    EXPECT_NO_THROW(cached_factorization(m, {}));
}

TEST(Io, FormatDoubleRoundTrips)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 200; ++i)
    {
        const double v = u(rng) * std::pow(10.0, i % 20 - 10);
        const std::string s = format_double(v);
        double back = 0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        EXPECT_EQ(back, v) << s;
    }
    EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Io, CsvUsesCrlfAndHeader)
{
    TempDir dir;
    write_csv(dir / "t.csv", {"a", "b,c"}, {{1.0, 2.5}, {-3.0, 0.25}});
    EXPECT_EQ(slurp(dir / "t.csv"), "a,\"b,c\"\r\n1,2.5\r\n-3,0.25\r\n");
}

TEST(Io, ImageCsv)
{
    TempDir dir;
    const auto grid = build_scene_grid(20.0, -1.0, 1.0, 1.0, {0.0, 5.0});
    RMatrix img(2, 3);
    img << 1, 2, 3, 4, 5, 6;
    write_image_csv(dir / "i.csv", grid, img);
    const auto text = slurp(dir / "i.csv");
    EXPECT_EQ(text.substr(0, text.find("\r\n")), "elevation_deg,azimuth_deg,intensity");
    EXPECT_NE(text.find("5,1,6\r\n"), std::string::npos);
}

TEST(Io, PgmLayout)
{
    TempDir dir;
    RMatrix img(2, 3);
    img << 0.0, 0.5, 1.0, 2.0, 0.1, 0.0;
    write_pgm(dir / "i.pgm", img);
    const auto text = slurp(dir / "i.pgm");
    const std::string header = "P5\n3 2\n255\n";
    ASSERT_EQ(text.substr(0, header.size()), header);
    ASSERT_EQ(text.size(), header.size() + 6);
    // Top row is the highest elevation: the second matrix row, whose first pixel is the peak.
    EXPECT_EQ(static_cast<unsigned char>(text[header.size()]), 255);
    EXPECT_EQ(static_cast<unsigned char>(text[header.size() + 2]), 0);
}
