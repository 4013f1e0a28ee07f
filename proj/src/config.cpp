#include "sgq/config.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>
#include <yaml-cpp/yaml.h>

#include "sgq/cesium.hpp"
#include "sgq/constants.hpp"

namespace sgq {
namespace {

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
    if (!node.IsMap()) throw ConfigError(fmt::format("'{}' must be a mapping", where));
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.contains(key)) throw ConfigError(fmt::format("unknown key '{}' in '{}'", key, where));
    }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
    if (!node[key]) return;
    try {
        out = node[key].as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(fmt::format("bad value for '{}.{}'", where, key));
    }
}

template <typename T>
void read_opt(const YAML::Node& node, const char* key, std::optional<T>& out, const std::string& where) {
    if (!node[key]) return;
    T v{};
    read(node, key, v, where);
    out = v;
}

TrapModel parse_model(const std::string& s, const std::string& where) {
    if (s == "harmonic") return TrapModel::harmonic;
    if (s == "four_beam") return TrapModel::four_beam;
    throw ConfigError(fmt::format("'{}' must be harmonic or four_beam (got '{}')", where, s));
}

const char* model_name(TrapModel m) { return m == TrapModel::harmonic ? "harmonic" : "four_beam"; }

void read_override(const YAML::Node& n, ScenarioOverride& o, const std::string& where) {
    check_keys(n, where, {"label", "order", "temperature_uK", "offset_x_um", "offset_z_um", "noise_fraction",
                          "detuning_GHz", "power_uW"});
    read(n, "label", o.label, where);
    read_opt(n, "order", o.order, where);
    read_opt(n, "temperature_uK", o.temperature_uK, where);
    read_opt(n, "offset_x_um", o.offset_x_um, where);
    read_opt(n, "offset_z_um", o.offset_z_um, where);
    read_opt(n, "noise_fraction", o.noise_fraction, where);
    read_opt(n, "detuning_GHz", o.detuning_GHz, where);
    read_opt(n, "power_uW", o.power_uW, where);
}

}  // namespace

AppConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("YAML parse error: ") + e.what());
    }
    AppConfig cfg;
    if (root.IsNull()) return cfg;
    check_keys(root, "<root>", {"rng_seed", "trap", "beams", "raman", "ensemble", "analysis", "output", "sweep"});
    read(root, "rng_seed", cfg.rng_seed, "<root>");

    if (auto n = root["trap"]) {
        check_keys(n, "trap", {"period_um", "waist_um", "wavelength_nm", "power_per_beam_W", "polarizability_A3",
                               "motion_model", "stark_model"});
        auto& t = cfg.trap;
        read(n, "period_um", t.period_um, "trap");
        read(n, "waist_um", t.waist_um, "trap");
        read(n, "wavelength_nm", t.wavelength_nm, "trap");
        read(n, "power_per_beam_W", t.power_per_beam_W, "trap");
        read(n, "polarizability_A3", t.polarizability_A3, "trap");
        std::string m;
        m = model_name(t.motion_model);
        read(n, "motion_model", m, "trap");
        t.motion_model = parse_model(m, "trap.motion_model");
        m = model_name(t.stark_model);
        read(n, "stark_model", m, "trap");
        t.stark_model = parse_model(m, "trap.stark_model");
    }

    if (auto n = root["beams"]) {
        check_keys(n, "beams", {"wavelength_nm", "gaussian_waist_um", "jitter_nm", "orders", "grid", "quadrature"});
        auto& b = cfg.beams;
        read(n, "wavelength_nm", b.wavelength_nm, "beams");
        read(n, "gaussian_waist_um", b.gaussian_waist_um, "beams");
        read(n, "jitter_nm", b.jitter_nm, "beams");
        if (auto list = n["orders"]) {
            if (!list.IsSequence()) throw ConfigError("'beams.orders' must be a list");
            b.orders.clear();
            for (const auto& e : list) {
                BeamEntry be;
                if (e.IsScalar()) {
                    be.order = e.as<double>();
                } else {
                    check_keys(e, "beams.orders[]", {"order", "width_um"});
                    read(e, "order", be.order, "beams.orders[]");
                    if (auto w = e["width_um"]) {
                        if (w.as<std::string>() != "auto") read_opt(e, "width_um", be.width_um, "beams.orders[]");
                    }
                }
                b.orders.push_back(be);
            }
        }
        if (auto g = n["grid"]) {
            check_keys(g, "beams.grid", {"r_max_um", "dr_nm", "z_max_um", "dz_nm"});
            read(g, "r_max_um", b.r_max_um, "beams.grid");
            read(g, "dr_nm", b.dr_nm, "beams.grid");
            read(g, "z_max_um", b.z_max_um, "beams.grid");
            read(g, "dz_nm", b.dz_nm, "beams.grid");
        }
        if (auto q = n["quadrature"]) {
            check_keys(q, "beams.quadrature", {"amplitude_floor", "spacing_wavelengths"});
            read(q, "amplitude_floor", b.amplitude_floor, "beams.quadrature");
            read(q, "spacing_wavelengths", b.spacing_wavelengths, "beams.quadrature");
        }
    }

    if (auto n = root["raman"]) {
        check_keys(n, "raman", {"power_uW", "detuning_GHz", "detuning_reference"});
        read(n, "power_uW", cfg.raman.power_uW, "raman");
        read(n, "detuning_GHz", cfg.raman.detuning_GHz, "raman");
        std::string ref = cfg.raman.reference == DetuningReference::f4 ? "F4" : "fine_structure";
        read(n, "detuning_reference", ref, "raman");
        if (ref == "F4") cfg.raman.reference = DetuningReference::f4;
        else if (ref == "fine_structure") cfg.raman.reference = DetuningReference::fine_structure;
        else throw ConfigError("'raman.detuning_reference' must be F4 or fine_structure");
    }

    if (auto n = root["ensemble"]) {
        check_keys(n, "ensemble", {"temperature_uK", "order", "offset_x_um", "offset_z_um", "noise_fraction", "n_atoms",
                                   "n_repeats", "dt_us", "t_total_us", "substeps"});
        auto& e = cfg.ensemble;
        read(n, "temperature_uK", e.temperature_uK, "ensemble");
        read(n, "order", e.order, "ensemble");
        read(n, "offset_x_um", e.offset_x_um, "ensemble");
        read(n, "offset_z_um", e.offset_z_um, "ensemble");
        read(n, "noise_fraction", e.noise_fraction, "ensemble");
        read(n, "n_atoms", e.n_atoms, "ensemble");
        read(n, "n_repeats", e.n_repeats, "ensemble");
        read(n, "dt_us", e.dt_us, "ensemble");
        read(n, "t_total_us", e.t_total_us, "ensemble");
        read(n, "substeps", e.substeps, "ensemble");
    }

    if (auto n = root["analysis"]) {
        check_keys(n, "analysis", {"thompson_alpha", "hermite_order"});
        read(n, "thompson_alpha", cfg.analysis.thompson_alpha, "analysis");
        read(n, "hermite_order", cfg.analysis.hermite_order, "analysis");
    }

    if (auto n = root["output"]) {
        check_keys(n, "output", {"dir", "map_cache"});
        read(n, "dir", cfg.output.dir, "output");
        read(n, "map_cache", cfg.output.map_cache, "output");
    }

    if (auto n = root["sweep"]) {
        if (!n.IsSequence()) throw ConfigError("'sweep' must be a list");
        for (const auto& e : n) {
            ScenarioOverride o;
            read_override(e, o, "sweep[]");
            cfg.sweep.push_back(o);
        }
    }

    validate_config(cfg);
    return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const AppConfig& c) {
    std::string s;
    s += fmt::format("rng_seed: {}\n", c.rng_seed);
    s += "trap:\n";
    s += fmt::format("  period_um: {}\n  waist_um: {}\n  wavelength_nm: {}\n  power_per_beam_W: {}\n"
                     "  polarizability_A3: {}\n  motion_model: {}\n  stark_model: {}\n",
                     c.trap.period_um, c.trap.waist_um, c.trap.wavelength_nm, c.trap.power_per_beam_W,
                     c.trap.polarizability_A3, model_name(c.trap.motion_model), model_name(c.trap.stark_model));
    s += "beams:\n";
    s += fmt::format("  wavelength_nm: {}\n  gaussian_waist_um: {}\n  jitter_nm: {}\n  orders:\n", c.beams.wavelength_nm,
                     c.beams.gaussian_waist_um, c.beams.jitter_nm);
    for (const auto& b : c.beams.orders)
        s += b.width_um ? fmt::format("    - {{order: {}, width_um: {}}}\n", b.order, *b.width_um)
                        : fmt::format("    - {{order: {}, width_um: auto}}\n", b.order);
    s += fmt::format("  grid:\n    r_max_um: {}\n    dr_nm: {}\n    z_max_um: {}\n    dz_nm: {}\n", c.beams.r_max_um,
                     c.beams.dr_nm, c.beams.z_max_um, c.beams.dz_nm);
    s += fmt::format("  quadrature:\n    amplitude_floor: {}\n    spacing_wavelengths: {}\n", c.beams.amplitude_floor,
                     c.beams.spacing_wavelengths);
    s += fmt::format("raman:\n  power_uW: {}\n  detuning_GHz: {}\n  detuning_reference: {}\n", c.raman.power_uW,
                     c.raman.detuning_GHz, c.raman.reference == DetuningReference::f4 ? "F4" : "fine_structure");
    const auto& e = c.ensemble;
    s += fmt::format("ensemble:\n  temperature_uK: {}\n  order: {}\n  offset_x_um: {}\n  offset_z_um: {}\n"
                     "  noise_fraction: {}\n  n_atoms: {}\n  n_repeats: {}\n  dt_us: {}\n  t_total_us: {}\n"
                     "  substeps: {}\n",
                     e.temperature_uK, e.order, e.offset_x_um, e.offset_z_um, e.noise_fraction, e.n_atoms,
                     e.n_repeats, e.dt_us, e.t_total_us, e.substeps);
    s += fmt::format("analysis:\n  thompson_alpha: {}\n  hermite_order: {}\n", c.analysis.thompson_alpha,
                     c.analysis.hermite_order);
    s += fmt::format("output:\n  dir: \"{}\"\n  map_cache: \"{}\"\n", c.output.dir, c.output.map_cache);
    if (c.sweep.empty()) {
        s += "sweep: []\n";
    } else {
        s += "sweep:\n";
        for (const auto& o : c.sweep) {
            s += fmt::format("  - label: \"{}\"\n", o.label);
            auto opt = [&s](const char* k, const std::optional<double>& v) {
                if (v) s += fmt::format("    {}: {}\n", k, *v);
            };
            opt("order", o.order);
            opt("temperature_uK", o.temperature_uK);
            opt("offset_x_um", o.offset_x_um);
            opt("offset_z_um", o.offset_z_um);
            opt("noise_fraction", o.noise_fraction);
            opt("detuning_GHz", o.detuning_GHz);
            opt("power_uW", o.power_uW);
        }
    }
    return s;
}

TrapConfig trap_config(const AppConfig& c) {
    TrapConfig t;
    t.period_d = c.trap.period_um * 1e-6;
    t.trap_waist_w0 = c.trap.waist_um * 1e-6;
    t.trap_wavelength = c.trap.wavelength_nm * 1e-9;
    t.power_per_beam_P = c.trap.power_per_beam_W;
    t.polarizability_alpha = polarizability_cgs_to_si(c.trap.polarizability_A3 * 1e-24);
    t.model = c.trap.motion_model;
    return t;
}

double beam_width(const AppConfig& c, double order) {
    for (const auto& b : c.beams.orders)
        if (b.order == order && b.width_um) return *b.width_um * 1e-6;
    const double w0 = c.beams.gaussian_waist_um * 1e-6;
    if (order == 2.0) return w0;
    return super_gaussian_width(order, w0, c.trap.period_um * 1e-6, c.beams.jitter_nm * 1e-9);
}

BeamSpec beam_spec(const AppConfig& c, double order) {
    BeamSpec b;
    b.order_n = order;
    b.waist_w = beam_width(c, order);
    b.wavelength = c.beams.wavelength_nm * 1e-9;
    const double w0 = c.beams.gaussian_waist_um * 1e-6;
    b.peak_intensity_I0 = 2.0 * c.raman.power_uW * 1e-6 / (phys::pi * w0 * w0);
    return b;
}

GridSpec grid_spec(const AppConfig& c) {
    return {c.beams.r_max_um * 1e-6, c.beams.dr_nm * 1e-9, c.beams.z_max_um * 1e-6, c.beams.dz_nm * 1e-9};
}

RamanConfig raman_config(const AppConfig& c, std::optional<double> detuning_GHz, std::optional<double> power_uW) {
    RamanConfig r;
    const double delta = phys::two_pi * detuning_GHz.value_or(c.raman.detuning_GHz) * 1e9;
    r.detuning_R = c.raman.reference == DetuningReference::f4 ? detuning_from_f4(delta) : delta;
    r.power1 = r.power2 = power_uW.value_or(c.raman.power_uW) * 1e-6;
    r.reference_waist = c.beams.gaussian_waist_um * 1e-6;
    return r;
}

Scenario base_scenario(const AppConfig& c) { return apply_override(c, {}); }

Scenario apply_override(const AppConfig& c, const ScenarioOverride& o) {
    const auto& e = c.ensemble;
    Scenario s;
    const double order = o.order.value_or(e.order);
    s.temperature = o.temperature_uK.value_or(e.temperature_uK) * 1e-6;
    s.beam = beam_spec(c, order);
    s.beam.offset_x = o.offset_x_um.value_or(e.offset_x_um) * 1e-6;
    s.beam.offset_z_waist = o.offset_z_um.value_or(e.offset_z_um) * 1e-6;
    s.raman = raman_config(c, o.detuning_GHz, o.power_uW);
    s.trap = trap_config(c);
    s.stark_model = c.trap.stark_model;
    s.noise_fraction = o.noise_fraction.value_or(e.noise_fraction);
    s.n_atoms = e.n_atoms;
    s.n_repeats = e.n_repeats;
    s.dt = e.dt_us * 1e-6;
    s.t_total = e.t_total_us * 1e-6;
    s.substeps = e.substeps;
    s.rng_seed = c.rng_seed;
    s.thompson_alpha = c.analysis.thompson_alpha;
    s.grid = grid_spec(c);
    s.amplitude_floor = c.beams.amplitude_floor;
    s.spacing_fraction = c.beams.spacing_wavelengths;
    s.label = o.label.empty() ? fmt::format("n{}_T{}uK_dx{}um_dz{}um", order, s.temperature * 1e6,
                                            s.beam.offset_x * 1e6, s.beam.offset_z_waist * 1e6)
                              : o.label;
    return s;
}

void validate_config(const AppConfig& c) {
    try {
        trap_config(c).validate();
        if (!(c.beams.jitter_nm >= 0.0)) throw std::invalid_argument("jitter must be non-negative");
        for (const auto& b : c.beams.orders) beam_spec(c, b.order).validate();
        grid_spec(c).validate();
        if (!(c.beams.spacing_wavelengths > 0.0 && c.beams.spacing_wavelengths <= 0.25))
            throw std::invalid_argument("quadrature spacing must be in (0, 1/4] wavelengths");
        if (!(c.beams.amplitude_floor > 0.0 && c.beams.amplitude_floor <= 1e-8))
            throw std::invalid_argument("amplitude floor must be in (0, 1e-8]");
        if (c.analysis.hermite_order < 2) throw std::invalid_argument("hermite_order must be >= 2");
        (void)base_scenario(c).validate();
        for (const auto& o : c.sweep) (void)apply_override(c, o).validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("invalid config: ") + ex.what());
    }
}

std::vector<ScenarioOverride> table_rows(int table) {
    auto row = [](double n, double T, double dx, double dz) {
        ScenarioOverride o;
        o.order = n;
        o.temperature_uK = T;
        o.offset_x_um = dx;
        o.offset_z_um = dz;
        return o;
    };
    switch (table) {
        case 4:
            return {row(2, 5, 0, 0), row(2, 10, 0, 0), row(2, 20, 0, 0),
                    row(4, 20, 0, 0), row(6, 20, 0, 0), row(8, 20, 0, 0)};
        case 5:
            return {row(2, 20, 0.25, 0), row(2, 20, 0.5, 0), row(2, 20, 1, 0),
                    row(4, 20, 1, 0),    row(6, 20, 1, 0),   row(8, 20, 1, 0)};
        case 6:
            return {row(2, 20, 0, 2.5), row(2, 20, 0, 5), row(4, 20, 0, 5), row(6, 20, 0, 5), row(8, 20, 0, 5)};
        default:
            throw ConfigError(fmt::format("no Monte Carlo preset for table {}", table));
    }
}

std::vector<ScenarioOverride> variant_rows(const std::string& name) {
    std::vector<ScenarioOverride> rows;
    if (name == "jitter") {
        for (double n : {2.0, 4.0, 6.0, 8.0}) {
            ScenarioOverride o;
            o.order = n;
            o.offset_x_um = n == 2.0 ? 0.0 : 0.15;
            rows.push_back(o);
        }
    } else if (name == "noise" || name == "detuning") {
        for (double n : {2.0, 6.0})
            for (bool variant : {false, true}) {
                ScenarioOverride o;
                o.order = n;
                if (variant && name == "noise") o.noise_fraction = 0.02;
                if (variant && name == "detuning") {
                    o.detuning_GHz = 100.0;
                    o.power_uW = 25.0;
                }
                rows.push_back(o);
            }
    } else {
        throw ConfigError("unknown variant '" + name + "' (expected jitter, noise or detuning)");
    }
    return rows;
}

}  // namespace sgq
