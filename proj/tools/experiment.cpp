// SPDX-License-Identifier: Apache-2.0
#include "experiment.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pinhole/error.hpp"
#include "pinhole/hash.hpp"
#include "pinhole/mask.hpp"
#include "pinhole/propagation.hpp"

namespace pinhole::cli
{

using nlohmann::json;

namespace
{

[[noreturn]] void config_error(const std::string& path, const std::string& what)
{
    fail(ErrorKind::parameter, path + ": " + what);
}

// A JSON object whose keys must all be consumed.
class Section
{
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            config_error(path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    double number(const std::string& key, double fallback)
    {
        if (!has(key))
            return fallback;
        const auto& v = raw(key);
        if (v.is_string())
        {
            const auto s = v.get<std::string>();
            if (s == "inf")
                return std::numeric_limits<double>::infinity();
            if (s == "-inf")
                return -std::numeric_limits<double>::infinity();
        }
        if (!v.is_number())
            config_error(field(key), "expected a number");
        return v.get<double>();
    }

    std::uint64_t integer(const std::string& key, std::uint64_t fallback)
    {
        if (!has(key))
            return fallback;
        const auto& v = raw(key);
        if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0))
            config_error(field(key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool fallback)
    {
        if (!has(key))
            return fallback;
        const auto& v = raw(key);
        if (!v.is_boolean())
            config_error(field(key), "expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback)
    {
        if (!has(key))
            return fallback;
        const auto& v = raw(key);
        if (!v.is_string())
            config_error(field(key), "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback)
    {
        if (!has(key))
            return fallback;
        const auto& v = raw(key);
        if (!v.is_array())
            config_error(field(key), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i)
        {
            if (!v[i].is_number())
                config_error(field(key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::optional<Vec3> vec3(const std::string& key)
    {
        if (!has(key))
            return std::nullopt;
        const auto v = numbers(key, {});
        if (v.size() != 3)
            config_error(field(key), "expected three numbers");
        return Vec3(v[0], v[1], v[2]);
    }

    std::optional<Section> child(const std::string& key)
    {
        if (!has(key))
            return std::nullopt;
        return Section(raw(key), field(key));
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                config_error(field(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// Runs a library validation step and prefixes its message with the config section.
template <class F>
void validated(const std::string& section, F&& f)
{
    try
    {
        f();
    }
    catch (const Error& e)
    {
        const std::string what = e.what();
        const auto prefix = std::string(to_string(e.kind())) + ": ";
        throw Error(e.kind(), section + ": " + (what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what));
    }
}

json number_or_inf(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

} // namespace

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir)
{
    ExperimentConfig cfg;
    Section root(doc, "");

    MaskGeometry& mask = cfg.system.mask;
    if (auto s = root.child("mask"))
    {
        const auto blades = s->integer("blade_count", 1);
        if (blades > 1000)
            config_error(s->field("blade_count"), "implausible blade count");
        mask.blade_count = static_cast<int>(blades);
        mask.blade_length_m = s->number("blade_length_m", mask.blade_length_m);
        mask.blade_width_m = s->number("blade_width_m", mask.blade_width_m);
        mask.plane_depth_m = s->number("plane_depth_m", mask.plane_depth_m);
        mask.axis_offset_m = s->number("axis_offset_m", mask.axis_offset_m);
        if (s->has("material") && s->has("attenuation_db"))
            config_error(s->field("material"), "give either material or attenuation_db, not both");
        if (s->has("material"))
            validated(s->field("material"),
                      [&] { mask.attenuation_db = material_attenuation_db(s->text("material", "")); });
        mask.attenuation_db = s->number("attenuation_db", mask.attenuation_db);
        const auto mode = s->text("mode", "inverse");
        if (mode == "inverse")
            mask.mode = MaskMode::inverse_pinhole;
        else if (mode == "regular")
            mask.mode = MaskMode::regular_pinhole;
        else
            config_error(s->field("mode"), "expected \"inverse\" or \"regular\"");
        cfg.system.mask_options.soft_edges = s->boolean("soft_edges", false);
        s->finish();
    }
    validated("mask", [&] { mask.validate(); });

    RadarConfig& radar = cfg.system.radar;
    if (auto s = root.child("radar"))
    {
        radar.wavelength_m = s->number("wavelength_m", radar.wavelength_m);
        radar.azimuth_fov_deg = s->number("azimuth_fov_deg", radar.azimuth_fov_deg);
        radar.elevation_fov_deg = s->number("elevation_fov_deg", radar.elevation_fov_deg);
        cfg.separation_m = s->number("separation_m", cfg.separation_m);
        cfg.tx_position = s->vec3("tx_position");
        cfg.rx_position = s->vec3("rx_position");
        const auto dir = s->text("directionality", "bidirectional");
        if (dir == "bidirectional")
            cfg.system.directionality = Directionality::bidirectional;
        else if (dir == "unidirectional")
            cfg.system.directionality = Directionality::unidirectional;
        else
            config_error(s->field("directionality"), "expected \"bidirectional\" or \"unidirectional\"");
        cfg.azimuth_pattern_file = s->text("azimuth_pattern_file", "");
        cfg.elevation_pattern_file = s->text("elevation_pattern_file", "");
        s->finish();
    }
    if (cfg.separation_m < 0.0)
        config_error("radar.separation_m", "must be non-negative");
    const RadarConfig placed = make_radar(mask.axis_offset_m, cfg.separation_m, radar.wavelength_m);
    radar.tx_position = cfg.tx_position.value_or(placed.tx_position);
    radar.rx_position = cfg.rx_position.value_or(placed.rx_position);
    validated("radar", [&] { radar.validate(); });
    if (!cfg.azimuth_pattern_file.empty() || !cfg.elevation_pattern_file.empty())
    {
        AntennaPattern pattern = AntennaPattern::from_radar(radar);
        auto resolve = [&](const std::string& f) {
            const std::filesystem::path p(f);
            return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
        };
        validated("radar", [&] {
            if (!cfg.azimuth_pattern_file.empty())
                pattern.set_azimuth_table(load_pattern_table(resolve(cfg.azimuth_pattern_file)));
            if (!cfg.elevation_pattern_file.empty())
                pattern.set_elevation_table(load_pattern_table(resolve(cfg.elevation_pattern_file)));
        });
        cfg.system.pattern = pattern;
    }

    if (auto s = root.child("grid"))
    {
        cfg.grid.range_m = s->number("range_m", cfg.grid.range_m);
        cfg.grid.azimuth_min_deg = s->number("azimuth_min_deg", cfg.grid.azimuth_min_deg);
        cfg.grid.azimuth_max_deg = s->number("azimuth_max_deg", cfg.grid.azimuth_max_deg);
        cfg.grid.azimuth_step_deg = s->number("azimuth_step_deg", cfg.grid.azimuth_step_deg);
        cfg.grid.elevation_deg = s->numbers("elevation_deg", cfg.grid.elevation_deg);
        s->finish();
    }
    validated("grid", [&] {
        cfg.system.grid = build_scene_grid(cfg.grid.range_m, cfg.grid.azimuth_min_deg, cfg.grid.azimuth_max_deg,
                                           cfg.grid.azimuth_step_deg, cfg.grid.elevation_deg);
    });

    std::uint64_t positions = cfg.system.rotation.positions_per_rotation;
    if (auto s = root.child("rotation"))
    {
        positions = s->integer("positions_per_rotation", positions);
        cfg.rpm = s->number("rpm", cfg.rpm);
        s->finish();
    }
    if (!(cfg.rpm > 0.0) || !std::isfinite(cfg.rpm))
        config_error("rotation.rpm", "must be positive");
    validated("rotation", [&] { cfg.system.rotation = make_rotation(positions); });

    if (auto s = root.child("sampling"))
    {
        cfg.system.plane_spacing_m = s->number("plane_spacing_m", 0.0);
        cfg.system.plane_extent_m = s->number("plane_extent_m", 0.0);
        cfg.system.obliquity = s->boolean("obliquity", true);
        s->finish();
    }
    validated("sampling", [&] {
        make_plane_sampling(radar, mask, cfg.system.plane_spacing_m, cfg.system.plane_extent_m);
    });

    if (root.has("scene"))
    {
        Section s(root.raw("scene"), "scene");
        if (s.has("targets"))
        {
            const auto& arr = s.raw("targets");
            if (!arr.is_array())
                config_error("scene.targets", "expected an array");
            for (std::size_t i = 0; i < arr.size(); ++i)
            {
                Section t(arr[i], "scene.targets[" + std::to_string(i) + "]");
                TargetSpec spec;
                spec.azimuth_deg = t.number("azimuth_deg", 0.0);
                spec.elevation_deg = t.number("elevation_deg", 0.0);
                spec.reflectivity = t.number("reflectivity", 1.0);
                spec.phase_deg = t.number("phase_deg", 0.0);
                t.finish();
                if (spec.azimuth_deg < cfg.grid.azimuth_min_deg || spec.azimuth_deg > cfg.grid.azimuth_max_deg)
                    config_error(t.field("azimuth_deg"), "outside the scene grid");
                cfg.targets.push_back(spec);
            }
        }
        s.finish();
    }

    if (auto s = root.child("noise"))
    {
        cfg.noise.snr_db = s->number("snr_db", cfg.noise.snr_db);
        if (s->has("usable_singular_values"))
            cfg.noise.usable_singular_values = s->integer("usable_singular_values", 0);
        s->finish();
    }
    if (std::isnan(cfg.noise.snr_db))
        config_error("noise.snr_db", "must be a number");
    if (cfg.noise.usable_singular_values && *cfg.noise.usable_singular_values == 0)
        config_error("noise.usable_singular_values", "must be positive");

    if (auto s = root.child("recon"))
    {
        cfg.recon.sigma_max = s->integer("sigma_max", cfg.recon.sigma_max);
        const auto mode = s->text("truncation", "count");
        if (mode == "count")
            cfg.recon.truncation = Truncation::count;
        else if (mode == "relative")
            cfg.recon.truncation = Truncation::relative;
        else
            config_error(s->field("truncation"), "expected \"count\" or \"relative\"");
        cfg.recon.relative_threshold = s->number("relative_threshold", cfg.recon.relative_threshold);
        cfg.recon.normalize_output = s->boolean("normalize_output", cfg.recon.normalize_output);
        s->finish();
    }
    if (cfg.recon.sigma_max == 0)
        config_error("recon.sigma_max", "must be at least 1");
    if (!(cfg.recon.relative_threshold > 0.0 && cfg.recon.relative_threshold < 1.0))
        config_error("recon.relative_threshold", "must lie in (0, 1)");

    if (auto s = root.child("analysis"))
    {
        auto& a = cfg.analysis;
        a.psf_target_deg = s->number("psf_target_deg", a.psf_target_deg);
        a.full_rank_threshold = s->number("full_rank_threshold", a.full_rank_threshold);
        a.sar_kind = s->text("sar_kind", a.sar_kind);
        a.sar_extent_m = s->number("sar_extent_m", a.sar_extent_m);
        a.sweep_parameter = s->text("sweep_parameter", a.sweep_parameter);
        a.sweep_values = s->numbers("sweep_values", a.sweep_values);
        if (s->has("power"))
        {
            const auto& arr = s->raw("power");
            if (!arr.is_array())
                config_error(s->field("power"), "expected an array");
            a.power.clear();
            for (std::size_t i = 0; i < arr.size(); ++i)
            {
                Section p(arr[i], s->field("power") + "[" + std::to_string(i) + "]");
                PowerSpec spec;
                spec.label = p.text("label", "row" + std::to_string(i));
                spec.mass_kg = p.number("mass_kg", 0.0);
                spec.radius_m = p.number("radius_m", 0.0);
                spec.rpm = p.number("rpm", 600.0);
                p.finish();
                a.power.push_back(spec);
            }
        }
        s->finish();
        if (!a.sar_kind.empty())
            validated("analysis.sar_kind", [&] { parse_sar_kind(a.sar_kind); });
        validated("analysis.sweep_parameter", [&] { parse_sweep_parameter(a.sweep_parameter); });
        if (!(a.full_rank_threshold > 0.0 && a.full_rank_threshold < 1.0))
            config_error("analysis.full_rank_threshold", "must lie in (0, 1)");
        if (a.sar_extent_m < 0.0)
            config_error("analysis.sar_extent_m", "must be non-negative");
    }

    cfg.output_dir = root.text("output_dir", cfg.output_dir);
    cfg.seed = root.integer("seed", cfg.seed);
    root.finish();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::io, "cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    json doc;
    try
    {
        doc = json::parse(buf.str(), nullptr, true, /*ignore_comments=*/true);
    }
    catch (const json::parse_error& e)
    {
        // Report the byte offset as line:column.
        const std::string text = buf.str();
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
        {
            if (text[i] == '\n')
            {
                ++line;
                col = 1;
            }
            else
                ++col;
        }
        fail(ErrorKind::parameter,
             path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
    }
    try
    {
        return parse_config(doc, path.parent_path());
    }
    catch (const json::exception& e)
    {
        fail(ErrorKind::parameter, path.string() + ": " + e.what());
    }
}

json to_json(const ExperimentConfig& cfg)
{
    const auto& s = cfg.system;
    json j;
    j["radar"] = {
        {"wavelength_m", s.radar.wavelength_m},
        {"azimuth_fov_deg", s.radar.azimuth_fov_deg},
        {"elevation_fov_deg", s.radar.elevation_fov_deg},
        {"separation_m", cfg.separation_m},
        {"directionality", s.directionality == Directionality::bidirectional ? "bidirectional" : "unidirectional"},
    };
    if (cfg.tx_position)
        j["radar"]["tx_position"] = {cfg.tx_position->x(), cfg.tx_position->y(), cfg.tx_position->z()};
    if (cfg.rx_position)
        j["radar"]["rx_position"] = {cfg.rx_position->x(), cfg.rx_position->y(), cfg.rx_position->z()};
    if (!cfg.azimuth_pattern_file.empty())
        j["radar"]["azimuth_pattern_file"] = cfg.azimuth_pattern_file;
    if (!cfg.elevation_pattern_file.empty())
        j["radar"]["elevation_pattern_file"] = cfg.elevation_pattern_file;
    j["grid"] = {
        {"range_m", cfg.grid.range_m},
        {"azimuth_min_deg", cfg.grid.azimuth_min_deg},
        {"azimuth_max_deg", cfg.grid.azimuth_max_deg},
        {"azimuth_step_deg", cfg.grid.azimuth_step_deg},
        {"elevation_deg", cfg.grid.elevation_deg},
    };
    j["mask"] = {
        {"blade_count", s.mask.blade_count},
        {"blade_length_m", s.mask.blade_length_m},
        {"blade_width_m", s.mask.blade_width_m},
        {"plane_depth_m", s.mask.plane_depth_m},
        {"axis_offset_m", s.mask.axis_offset_m},
        {"attenuation_db", number_or_inf(s.mask.attenuation_db)},
        {"mode", s.mask.mode == MaskMode::inverse_pinhole ? "inverse" : "regular"},
        {"soft_edges", s.mask_options.soft_edges},
    };
    j["rotation"] = {{"positions_per_rotation", s.rotation.positions_per_rotation}, {"rpm", cfg.rpm}};
    j["sampling"] = {
        {"plane_spacing_m", s.plane_spacing_m},
        {"plane_extent_m", s.plane_extent_m},
        {"obliquity", s.obliquity},
    };
    json targets = json::array();
    for (const auto& t : cfg.targets)
        targets.push_back({{"azimuth_deg", t.azimuth_deg},
                           {"elevation_deg", t.elevation_deg},
                           {"reflectivity", t.reflectivity},
                           {"phase_deg", t.phase_deg}});
    j["scene"] = {{"targets", targets}};
    j["noise"] = {{"snr_db", number_or_inf(cfg.noise.snr_db)}};
    if (cfg.noise.usable_singular_values)
        j["noise"]["usable_singular_values"] = *cfg.noise.usable_singular_values;
    j["recon"] = {
        {"sigma_max", cfg.recon.sigma_max},
        {"truncation", cfg.recon.truncation == Truncation::count ? "count" : "relative"},
        {"relative_threshold", cfg.recon.relative_threshold},
        {"normalize_output", cfg.recon.normalize_output},
    };
    json power = json::array();
    for (const auto& p : cfg.analysis.power)
        power.push_back({{"label", p.label}, {"mass_kg", p.mass_kg}, {"radius_m", p.radius_m}, {"rpm", p.rpm}});
    j["analysis"] = {
        {"psf_target_deg", cfg.analysis.psf_target_deg},
        {"full_rank_threshold", cfg.analysis.full_rank_threshold},
        {"sar_kind", cfg.analysis.sar_kind},
        {"sar_extent_m", cfg.analysis.sar_extent_m},
        {"sweep_parameter", cfg.analysis.sweep_parameter},
        {"sweep_values", cfg.analysis.sweep_values},
        {"power", power},
    };
    j["output_dir"] = cfg.output_dir;
    j["seed"] = cfg.seed;
    return j;
}

std::uint64_t config_hash(const ExperimentConfig& cfg)
{
    Fnv1a h;
    h.str(to_json(cfg).dump());
    return h.value();
}

CVector scene_vector(const ExperimentConfig& cfg)
{
    const auto& grid = cfg.system.grid;
    CVector x = CVector::Zero(static_cast<Eigen::Index>(grid.size()));
    for (const auto& t : cfg.targets)
        x[static_cast<Eigen::Index>(grid.nearest_index(t.azimuth_deg, t.elevation_deg))] +=
            std::polar(t.reflectivity, deg2rad(t.phase_deg));
    return x;
}

} // namespace pinhole::cli
