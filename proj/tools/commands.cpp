// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "experiment.hpp"
#include "pinhole/analysis.hpp"
#include "pinhole/error.hpp"
#include "pinhole/forward.hpp"
#include "pinhole/hash.hpp"
#include "pinhole/io.hpp"
#include "pinhole/recon.hpp"

namespace pinhole::cli
{

using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

constexpr const char* tool_version = "0.1.0";

std::uint64_t file_hash(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::io, "cannot reopen " + p.string());
    Fnv1a h;
    char buf[1 << 14];
    while (in)
    {
        in.read(buf, sizeof buf);
        h.bytes(buf, static_cast<std::size_t>(in.gcount()));
    }
    return h.value();
}

std::string utc_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

void write_manifest(const fs::path& dir, const std::string& command, const ExperimentConfig& cfg,
                    const json& extra, const std::vector<fs::path>& outputs)
{
    json m;
    m["tool"] = "pinhole";
    m["version"] = tool_version;
    m["command"] = command;
    m["config_hash"] = fingerprint_hex(config_hash(cfg));
    m["seed"] = cfg.seed;
    m["created_utc"] = utc_now();
    for (auto it = extra.begin(); it != extra.end(); ++it)
        m[it.key()] = it.value();
    json files = json::array();
    for (const auto& p : outputs)
        files.push_back({{"file", p.filename().string()}, {"fnv1a", fingerprint_hex(file_hash(p))}});
    m["outputs"] = files;
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::io, "cannot write manifest in " + dir.string());
    out << m.dump(2) << "\n";
}

fs::path prepare_dir(const std::optional<fs::path>& override_dir, const ExperimentConfig& cfg)
{
    const fs::path dir = override_dir.value_or(fs::path(cfg.output_dir));
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec, ErrorKind::io, "cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

// Reference image from a CSV written by write_image_csv, resampled to the nearest grid bins.
RMatrix read_image_csv(const fs::path& path, const SceneGrid& grid)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::io, "cannot open reference image " + path.string());
    RMatrix img = RMatrix::Zero(static_cast<Eigen::Index>(grid.elevation_count()),
                                static_cast<Eigen::Index>(grid.azimuth_count()));
    std::string line;
    std::getline(in, line);
    require(line.rfind("elevation_deg,azimuth_deg,intensity", 0) == 0, ErrorKind::format,
            path.string() + ": expected header elevation_deg,azimuth_deg,intensity");
    std::size_t lineno = 1;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty() || line == "\r")
            continue;
        std::istringstream ss(line);
        double e = 0, a = 0, v = 0;
        char c1 = 0, c2 = 0;
        if (!(ss >> e >> c1 >> a >> c2 >> v) || c1 != ',' || c2 != ',')
            fail(ErrorKind::format, path.string() + ":" + std::to_string(lineno) + ": malformed row");
        const std::size_t idx = grid.nearest_index(a, e);
        img(static_cast<Eigen::Index>(idx / grid.azimuth_count()),
            static_cast<Eigen::Index>(idx % grid.azimuth_count())) = v;
    }
    return img;
}

RMatrix truth_image(const MeasurementSet& ms, const SceneGrid& grid)
{
    require(ms.truth.has_value(), ErrorKind::shape, "measurement file carries no truth vector");
    require(static_cast<std::size_t>(ms.truth->size()) == grid.size(), ErrorKind::shape,
            "truth vector does not match the scene grid");
    ImageResult r;
    r.intensity = ms.truth->cwiseAbs();
    r.azimuth_count = grid.azimuth_count();
    return r.image();
}

RMatrix peak_normalized(RMatrix m)
{
    const double peak = m.size() ? m.maxCoeff() : 0.0;
    if (peak > 0.0)
        m /= peak;
    return m;
}

void write_peaks(const fs::path& path, const SceneGrid& grid, const RMatrix& image)
{
    std::vector<std::vector<double>> rows;
    for (Eigen::Index e = 0; e < image.rows(); ++e)
    {
        const RVector line = image.row(e).transpose();
        for (auto a : local_maxima(line))
            if (line[static_cast<Eigen::Index>(a)] >= 0.5)
                rows.push_back({grid.elevation_deg[static_cast<std::size_t>(e)], grid.azimuth_deg[a],
                                line[static_cast<Eigen::Index>(a)]});
    }
    write_csv(path, {"elevation_deg", "azimuth_deg", "intensity"}, rows);
}

} // namespace

int run_guarded(const std::function<int()>& body, std::ostream& err)
{
    try
    {
        return body();
    }
    catch (const Error& e)
    {
        err << "error: " << e.what() << "\n";
        switch (e.kind())
        {
        case ErrorKind::parameter:
        case ErrorKind::unsupported_configuration:
        case ErrorKind::format:
        case ErrorKind::io:
            return exit_config;
        case ErrorKind::fingerprint_mismatch:
        case ErrorKind::shape:
        case ErrorKind::alignment:
        case ErrorKind::interpolation:
            return exit_mismatch;
        default:
            return exit_numeric;
        }
    }
    catch (const json::exception& e)
    {
        err << "error: config: " << e.what() << "\n";
        return exit_config;
    }
    catch (const std::bad_alloc&)
    {
        err << "error: out of memory\n";
        return exit_numeric;
    }
}

int cmd_simulate(const SimulateArgs& args, std::ostream& log)
{
    const ExperimentConfig cfg = load_config(args.config);
    const fs::path dir = prepare_dir(args.output_dir, cfg);

    log << "building forward model (" << cfg.system.rotation.size() << " x " << cfg.system.grid.size() << ")\n";
    const ForwardModel model = build_forward(cfg.system);
    const CVector x = scene_vector(cfg);

    const double ref_power = reference_signal_power(model, cfg.system.grid.nearest_index(0.0, 0.0));
    double noise_power = 0.0;
    double snr_db = cfg.noise.snr_db;
    if (cfg.noise.usable_singular_values)
    {
        const SvdFactorization fact = cached_factorization(model, args.cache_dir);
        noise_power = calibrated_noise_power(fact.S, *cfg.noise.usable_singular_values, cfg.system.grid.size());
        snr_db = 10.0 * std::log10(ref_power / noise_power);
    }
    else
        noise_power = noise_power_for_snr(ref_power, cfg.noise.snr_db);

    MeasurementSet ms = simulate(model, x, NoiseModel{noise_power, cfg.seed});
    ms.rpm = cfg.rpm;
    ms.snr_db = snr_db;

    std::vector<fs::path> outputs{dir / "measurements.bin"};
    write_measurements(outputs[0], ms, model.directionality);
    if (args.save_model)
    {
        outputs.push_back(dir / "model.bin");
        write_model(outputs.back(), model);
    }
    json extra{{"model_fingerprint", fingerprint_hex(model.fingerprint)},
               {"noise_power", noise_power},
               {"snr_db", std::isfinite(snr_db) ? json(snr_db) : json("inf")},
               {"config", to_json(cfg)}};
    write_manifest(dir, "simulate", cfg, extra, outputs);
    log << "wrote " << outputs[0].string() << "\n";
    return exit_ok;
}

int cmd_reconstruct(const ReconstructArgs& args, std::ostream& log)
{
    for (auto k : args.sigma_max)
        require(k >= 1, ErrorKind::parameter, "--sigma-max values must be at least 1");
    const ExperimentConfig cfg = load_config(args.config);
    const fs::path dir = prepare_dir(args.output_dir, cfg);
    const MeasurementSet ms = read_measurements(args.measurements);

    ForwardModel model;
    if (args.model)
        model = read_model(*args.model);
    else
    {
        log << "building forward model (" << cfg.system.rotation.size() << " x " << cfg.system.grid.size() << ")\n";
        model = build_forward(cfg.system);
    }
    if (ms.fingerprint != model.fingerprint)
        fail(ErrorKind::fingerprint_mismatch, "measurements were generated by model " + fingerprint_hex(ms.fingerprint) +
                                                  " but the supplied model is " + fingerprint_hex(model.fingerprint));
    require(ms.y.size() == model.rows(), ErrorKind::shape, "measurement length differs from model rows");
    const SceneGrid& grid = cfg.system.grid;
    require(static_cast<std::size_t>(model.cols()) == grid.size(), ErrorKind::shape,
            "model columns do not match the config's scene grid");

    std::optional<RMatrix> reference;
    if (args.reference)
        reference = peak_normalized(*args.reference == "truth" ? truth_image(ms, grid)
                                                               : read_image_csv(*args.reference, grid));

    log << "factorizing\n";
    const SvdFactorization fact = cached_factorization(model, args.cache_dir);

    std::vector<std::size_t> ks = args.sigma_max;
    if (ks.empty())
        ks.push_back(cfg.recon.sigma_max);

    std::vector<fs::path> outputs;
    std::vector<std::vector<double>> metric_rows;
    for (auto k : ks)
    {
        ReconConfig rc = cfg.recon;
        rc.sigma_max = k;
        rc.truncation = args.sigma_max.empty() ? cfg.recon.truncation : Truncation::count;
        const ImageResult res = reconstruct(fact, ms.y, rc, grid.azimuth_count());
        const RMatrix image = peak_normalized(res.image());
        const std::string stem = "image_k" + std::to_string(res.terms);
        outputs.push_back(dir / (stem + ".csv"));
        write_image_csv(outputs.back(), grid, image);
        outputs.push_back(dir / (stem + ".pgm"));
        write_pgm(outputs.back(), image);
        outputs.push_back(dir / ("peaks_k" + std::to_string(res.terms) + ".csv"));
        write_peaks(outputs.back(), grid, image);
        if (reference)
        {
            const MetricReport r = compare_images(image, *reference, grid);
            metric_rows.push_back(
                {static_cast<double>(res.terms), r.sharpness_ratio, r.mse, r.ssim, r.chamfer_m});
        }
        log << "sigma_max " << res.terms << " done\n";
    }
    if (reference)
    {
        outputs.push_back(dir / "metrics.csv");
        write_csv(outputs.back(), {"sigma_max", "sharpness", "mse", "ssim", "chamfer_m"}, metric_rows);
    }
    write_manifest(dir, "reconstruct", cfg,
                   {{"model_fingerprint", fingerprint_hex(model.fingerprint)},
                    {"measurements", args.measurements.filename().string()}},
                   outputs);
    return exit_ok;
}

namespace
{

int analyze_svd(const ExperimentConfig& cfg, const AnalyzeArgs& args, const fs::path& dir, std::ostream& log)
{
    SystemConfig bi = cfg.system;
    bi.directionality = Directionality::bidirectional;
    SystemConfig uni = cfg.system;
    uni.directionality = Directionality::unidirectional;
    log << "factorizing bidirectional model\n";
    const auto sb = cached_factorization(build_forward(bi), args.cache_dir).S;
    log << "factorizing unidirectional model\n";
    const auto su = cached_factorization(build_forward(uni), args.cache_dir).S;
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < std::min(sb.size(), su.size()); ++i)
        rows.push_back({static_cast<double>(i + 1), sb[i], su[i], sb[i] / sb[0], su[i] / su[0]});
    const auto out = dir / "spectrum.csv";
    write_csv(out,
              {"index", "bidirectional", "unidirectional", "bidirectional_normalized", "unidirectional_normalized"},
              rows);
    write_manifest(dir, "analyze svd", cfg, json::object(), {out});
    return exit_ok;
}

int analyze_psf(const ExperimentConfig& cfg, const AnalyzeArgs& args, const fs::path& dir, std::ostream& log)
{
    const std::string sar = args.sar_kind.value_or(cfg.analysis.sar_kind);
    const double extent = args.sar_extent_m.value_or(cfg.analysis.sar_extent_m);
    ForwardModel model;
    std::string label;
    if (!sar.empty())
    {
        model = sar_baseline(parse_sar_kind(sar), extent, cfg.system.radar, cfg.system.grid,
                             cfg.system.rotation.size());
        label = "sar-" + sar;
    }
    else
    {
        model = build_forward(cfg.system);
        label = cfg.system.directionality == Directionality::bidirectional ? "pinhole-bidirectional"
                                                                           : "pinhole-unidirectional";
    }
    ReconConfig rc = full_rank_config(cfg.analysis.full_rank_threshold);
    if (args.sigma_max)
    {
        rc.truncation = Truncation::count;
        rc.sigma_max = *args.sigma_max;
    }
    log << "factorizing " << label << " model\n";
    const auto fact = cached_factorization(model, args.cache_dir);
    const PsfCurve c = psf(fact, model, cfg.system.grid, cfg.analysis.psf_target_deg, rc);

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < c.angles_deg.size(); ++i)
        rows.push_back({c.angles_deg[i], c.response[static_cast<Eigen::Index>(i)]});
    const auto curve = dir / "psf.csv";
    write_csv(curve, {"angle_deg", "response"}, rows);
    const auto summary = dir / "psf_summary.csv";
    {
        std::ofstream out(summary, std::ios::binary | std::ios::trunc);
        require(static_cast<bool>(out), ErrorKind::io, "cannot write " + summary.string());
        out << "model,target_deg,fwhp_deg,bounded\r\n"
            << label << "," << format_double(cfg.analysis.psf_target_deg) << "," << format_double(c.fwhp_deg) << ","
            << (c.bounded ? "true" : "false") << "\r\n";
    }
    log << label << " fwhp " << c.fwhp_deg << " deg\n";
    write_manifest(dir, "analyze psf", cfg, json::object(), {curve, summary});
    return exit_ok;
}

int analyze_sweep(const ExperimentConfig& cfg, const AnalyzeArgs& args, const fs::path& dir, std::ostream& log)
{
    SweepOptions opt;
    opt.target_deg = cfg.analysis.psf_target_deg;
    opt.recon = full_rank_config(cfg.analysis.full_rank_threshold);
    if (cfg.noise.usable_singular_values)
    {
        const auto fact = cached_factorization(build_forward(cfg.system), args.cache_dir);
        opt.noise_power = calibrated_noise_power(fact.S, *cfg.noise.usable_singular_values, cfg.system.grid.size());
    }
    const auto result =
        sweep(parse_sweep_parameter(cfg.analysis.sweep_parameter), cfg.analysis.sweep_values, cfg.system, opt);
    for (const auto& w : result.warnings)
        log << "warning: " << w << "\n";
    std::vector<std::vector<double>> rows;
    for (const auto& r : result.rows)
        rows.push_back({r.value, r.fwhp_deg, r.s_first, r.s_10, r.s_40, static_cast<double>(r.usable)});
    const auto out = dir / "sweep.csv";
    write_csv(out, {"value", "fwhp_deg", "s_first", "s_10", "s_40", "usable"}, rows);
    write_manifest(dir, "analyze sweep", cfg, {{"parameter", cfg.analysis.sweep_parameter}}, {out});
    return exit_ok;
}

int analyze_power(const ExperimentConfig& cfg, const fs::path& dir)
{
    const auto out = dir / "power.csv";
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(f), ErrorKind::io, "cannot write " + out.string());
    f << "label,mass_kg,radius_m,rpm,watts\r\n";
    for (const auto& p : cfg.analysis.power)
        f << p.label << "," << format_double(p.mass_kg) << "," << format_double(p.radius_m) << ","
          << format_double(p.rpm) << "," << format_double(rotational_power(p.mass_kg, p.radius_m, rpm_to_rad_s(p.rpm)))
          << "\r\n";
    f.close();
    write_manifest(dir, "analyze power", cfg, json::object(), {out});
    return exit_ok;
}

} // namespace

int cmd_analyze(const AnalyzeArgs& args, std::ostream& log)
{
    const ExperimentConfig cfg = args.config ? load_config(*args.config) : parse_config(json::object());
    const fs::path dir = prepare_dir(args.output_dir, cfg);
    if (args.subcommand == "svd")
        return analyze_svd(cfg, args, dir, log);
    if (args.subcommand == "psf")
        return analyze_psf(cfg, args, dir, log);
    if (args.subcommand == "sweep")
        return analyze_sweep(cfg, args, dir, log);
    if (args.subcommand == "power")
        return analyze_power(cfg, dir);
    fail(ErrorKind::parameter, "unknown analysis '" + args.subcommand + "'");
}

} // namespace pinhole::cli
