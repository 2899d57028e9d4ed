// SPDX-License-Identifier: Apache-2.0
#include "pinhole/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

#include "pinhole/error.hpp"

namespace pinhole
{

namespace
{

constexpr std::array<char, 8> magic{'P', 'N', 'H', 'L', 'B', 'I', 'N', '\0'};
constexpr std::uint32_t container_version = 1;

class Writer
{
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc), path_(path)
    {
        require(static_cast<bool>(out_), ErrorKind::io, "cannot open " + path.string() + " for writing");
    }

    void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    void u32(std::uint32_t v)
    {
        unsigned char b[4];
        for (int i = 0; i < 4; ++i)
            b[i] = static_cast<unsigned char>(v >> (8 * i));
        raw(b, 4);
    }
    void u64(std::uint64_t v)
    {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i)
            b[i] = static_cast<unsigned char>(v >> (8 * i));
        raw(b, 8);
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void scalar(double v, std::uint32_t bytes)
    {
        if (bytes == 4)
            f32(static_cast<float>(v));
        else
            f64(v);
    }
    template <class Derived>
    void complex_block(const Eigen::MatrixBase<Derived>& m, std::uint32_t bytes)
    {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i)
            {
                scalar(m(i, j).real(), bytes);
                scalar(m(i, j).imag(), bytes);
            }
    }
    void header(const ContainerHeader& h)
    {
        raw(magic.data(), magic.size());
        u32(h.version);
        u32(static_cast<std::uint32_t>(h.kind));
        u32(h.directionality == Directionality::bidirectional ? 1 : 0);
        u32(h.scalar_bytes);
        u64(h.fingerprint);
        u64(h.rows);
        u64(h.cols);
        f64(h.rpm);
        f64(h.snr_db);
        u64(h.flags);
    }
    void finish()
    {
        out_.flush();
        require(static_cast<bool>(out_), ErrorKind::io, "write to " + path_.string() + " failed");
    }

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

class Reader
{
public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path)
    {
        require(static_cast<bool>(in_), ErrorKind::io, "cannot open " + path.string());
    }

    void raw(void* p, std::size_t n)
    {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        require(in_.gcount() == static_cast<std::streamsize>(n), ErrorKind::format,
                path_.string() + ": truncated container");
    }
    std::uint32_t u32()
    {
        unsigned char b[4];
        raw(b, 4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64()
    {
        unsigned char b[8];
        raw(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    double scalar(std::uint32_t bytes) { return bytes == 4 ? std::bit_cast<float>(u32()) : f64(); }
    CMatrix complex_block(Eigen::Index rows, Eigen::Index cols, std::uint32_t bytes)
    {
        CMatrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i)
            {
                const double re = scalar(bytes);
                const double im = scalar(bytes);
                m(i, j) = cplx(re, im);
            }
        return m;
    }
    ContainerHeader header()
    {
        std::array<char, 8> got{};
        raw(got.data(), got.size());
        require(got == magic, ErrorKind::format, path_.string() + ": not a pinhole container");
        ContainerHeader h;
        h.version = u32();
        require(h.version == container_version, ErrorKind::format,
                path_.string() + ": unsupported container version " + std::to_string(h.version));
        const std::uint32_t kind = u32();
        require(kind >= 1 && kind <= 3, ErrorKind::format, path_.string() + ": unknown container kind");
        h.kind = static_cast<ContainerKind>(kind);
        h.directionality = u32() ? Directionality::bidirectional : Directionality::unidirectional;
        h.scalar_bytes = u32();
        require(h.scalar_bytes == 4 || h.scalar_bytes == 8, ErrorKind::format,
                path_.string() + ": scalar width must be 4 or 8 bytes");
        h.fingerprint = u64();
        h.rows = u64();
        h.cols = u64();
        h.rpm = f64();
        h.snr_db = f64();
        h.flags = u64();
        // Guard against absurd sizes before allocating.
        require(h.rows < (1ULL << 31) && h.cols < (1ULL << 31), ErrorKind::format,
                path_.string() + ": implausible dimensions");
        return h;
    }
    void expect_end()
    {
        char c;
        in_.read(&c, 1);
        require(in_.gcount() == 0, ErrorKind::format, path_.string() + ": trailing bytes after payload");
    }

private:
    std::ifstream in_;
    std::filesystem::path path_;
};

void expect_kind(const ContainerHeader& h, ContainerKind kind, const std::filesystem::path& path)
{
    require(h.kind == kind, ErrorKind::format, path.string() + ": container holds a different kind of data");
}

} // namespace

ContainerHeader read_header(const std::filesystem::path& path)
{
    Reader r(path);
    return r.header();
}

void write_measurements(const std::filesystem::path& path, const MeasurementSet& ms, Directionality directionality)
{
    ContainerHeader h;
    h.kind = ContainerKind::measurements;
    h.directionality = directionality;
    h.fingerprint = ms.fingerprint;
    h.rows = static_cast<std::uint64_t>(ms.y.size());
    h.cols = 1;
    h.rpm = ms.rpm;
    h.snr_db = ms.snr_db;
    h.flags = ms.truth ? 1 : 0;
    Writer w(path);
    w.header(h);
    w.complex_block(ms.y, h.scalar_bytes);
    if (ms.truth)
    {
        w.u64(static_cast<std::uint64_t>(ms.truth->size()));
        w.complex_block(*ms.truth, h.scalar_bytes);
    }
    w.finish();
}

MeasurementSet read_measurements(const std::filesystem::path& path)
{
    Reader r(path);
    const auto h = r.header();
    expect_kind(h, ContainerKind::measurements, path);
    require(h.cols == 1, ErrorKind::format, path.string() + ": measurement payload must be a single column");
    MeasurementSet ms;
    ms.y = r.complex_block(static_cast<Eigen::Index>(h.rows), 1, h.scalar_bytes);
    ms.fingerprint = h.fingerprint;
    ms.rpm = h.rpm;
    ms.snr_db = h.snr_db;
    if (h.flags & 1)
    {
        const auto n = r.u64();
        require(n < (1ULL << 31), ErrorKind::format, path.string() + ": implausible truth length");
        ms.truth = CVector(r.complex_block(static_cast<Eigen::Index>(n), 1, h.scalar_bytes));
    }
    r.expect_end();
    return ms;
}

void write_model(const std::filesystem::path& path, const ForwardModel& model)
{
    ContainerHeader h;
    h.kind = ContainerKind::forward_model;
    h.directionality = model.directionality;
    h.fingerprint = model.fingerprint;
    h.rows = static_cast<std::uint64_t>(model.rows());
    h.cols = static_cast<std::uint64_t>(model.cols());
    Writer w(path);
    w.header(h);
    w.complex_block(model.B, h.scalar_bytes);
    w.finish();
}

ForwardModel read_model(const std::filesystem::path& path)
{
    Reader r(path);
    const auto h = r.header();
    expect_kind(h, ContainerKind::forward_model, path);
    ForwardModel model;
    model.B = r.complex_block(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols), h.scalar_bytes);
    model.fingerprint = h.fingerprint;
    model.directionality = h.directionality;
    r.expect_end();
    return model;
}

void write_factorization(const std::filesystem::path& path, const SvdFactorization& fact)
{
    ContainerHeader h;
    h.kind = ContainerKind::factorization;
    h.scalar_bytes = 8;
    h.fingerprint = fact.fingerprint;
    h.rows = static_cast<std::uint64_t>(fact.U.rows());
    h.cols = static_cast<std::uint64_t>(fact.V.rows());
    Writer w(path);
    w.header(h);
    w.u64(static_cast<std::uint64_t>(fact.S.size()));
    for (Eigen::Index i = 0; i < fact.S.size(); ++i)
        w.f64(fact.S[i]);
    w.complex_block(fact.U, 8);
    w.complex_block(fact.V, 8);
    w.finish();
}

SvdFactorization read_factorization(const std::filesystem::path& path)
{
    Reader r(path);
    const auto h = r.header();
    expect_kind(h, ContainerKind::factorization, path);
    const auto k = r.u64();
    require(k == std::min(h.rows, h.cols), ErrorKind::format, path.string() + ": inconsistent singular value count");
    SvdFactorization f;
    f.fingerprint = h.fingerprint;
    f.S.resize(static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < f.S.size(); ++i)
        f.S[i] = r.f64();
    f.U = r.complex_block(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(k), h.scalar_bytes);
    f.V = r.complex_block(static_cast<Eigen::Index>(h.cols), static_cast<Eigen::Index>(k), h.scalar_bytes);
    r.expect_end();
    return f;
}

std::string fingerprint_hex(std::uint64_t fingerprint)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, fingerprint >>= 4)
        s[static_cast<std::size_t>(i)] = digits[fingerprint & 0xf];
    return s;
}

SvdFactorization cached_factorization(const ForwardModel& model, const std::filesystem::path& cache_dir)
{
    if (cache_dir.empty())
        return factorize(model);
    const auto file = cache_dir / (fingerprint_hex(model.fingerprint) + ".svd");
    if (std::filesystem::exists(file))
    {
        auto f = read_factorization(file);
        if (f.fingerprint == model.fingerprint && f.U.rows() == model.rows() && f.V.rows() == model.cols())
            return f;
    }
    auto f = factorize(model);
    std::filesystem::create_directories(cache_dir);
    // Write to a temporary name first so a concurrent reader never sees a partial file.
    const auto tmp = file.string() + ".tmp";
    write_factorization(tmp, f);
    std::filesystem::rename(tmp, file);
    return f;
}

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace
{

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::ofstream open_text(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::io, "cannot open " + path.string() + " for writing");
    return out;
}

} // namespace

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows)
{
    auto out = open_text(path);
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << csv_field(header[i]);
    out << "\r\n";
    for (const auto& row : rows)
    {
        require(row.size() == header.size(), ErrorKind::shape, "CSV row width differs from header");
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\r\n";
    }
    require(static_cast<bool>(out), ErrorKind::io, "write to " + path.string() + " failed");
}

void write_image_csv(const std::filesystem::path& path, const SceneGrid& grid, const Eigen::Ref<const RMatrix>& image)
{
    require(static_cast<std::size_t>(image.rows()) == grid.elevation_count() &&
                static_cast<std::size_t>(image.cols()) == grid.azimuth_count(),
            ErrorKind::shape, "image does not match the scene grid");
    std::vector<std::vector<double>> rows;
    for (Eigen::Index e = 0; e < image.rows(); ++e)
        for (Eigen::Index a = 0; a < image.cols(); ++a)
            rows.push_back({grid.elevation_deg[static_cast<std::size_t>(e)],
                            grid.azimuth_deg[static_cast<std::size_t>(a)], image(e, a)});
    write_csv(path, {"elevation_deg", "azimuth_deg", "intensity"}, rows);
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::Ref<const CMatrix>& m)
{
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            rows.push_back({static_cast<double>(i), static_cast<double>(j), m(i, j).real(), m(i, j).imag()});
    write_csv(path, {"row", "col", "re", "im"}, rows);
}

void write_pgm(const std::filesystem::path& path, const Eigen::Ref<const RMatrix>& image, double floor)
{
    require(image.size() > 0, ErrorKind::shape, "empty image");
    require(floor >= 0.0 && floor < 1.0, ErrorKind::parameter, "display floor must lie in [0, 1)");
    const double peak = image.maxCoeff();
    auto out = open_text(path);
    out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
    // Top row is the highest elevation.
    for (Eigen::Index e = image.rows() - 1; e >= 0; --e)
        for (Eigen::Index a = 0; a < image.cols(); ++a)
        {
            double v = peak > 0.0 ? image(e, a) / peak : 0.0;
            v = std::clamp(v, floor, 1.0);
            const auto level = static_cast<unsigned char>(std::lround(255.0 * (v - floor) / (1.0 - floor)));
            out.put(static_cast<char>(level));
        }
    require(static_cast<bool>(out), ErrorKind::io, "write to " + path.string() + " failed");
}

} // namespace pinhole
