// sgq: command-line driver for the addressing-beam and Rabi-oscillation models.
//
//   sgq beam-map  [--order N]...      intensity maps, on-axis and radial cuts
//   sgq crosstalk                     neighbor-site crosstalk, scans, crossovers
//   sgq variance  [--aligned]         density-weighted intensity variance
//   sgq rabi      [--order N]         one Monte Carlo scenario
//   sgq sweep     [--table 4|5|6 | --variant NAME]
//   sgq constants
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgq/analysis.hpp"
#include "sgq/beamoptics.hpp"
#include "sgq/cesium.hpp"
#include "sgq/config.hpp"
#include "sgq/constants.hpp"
#include "sgq/ensemble.hpp"
#include "sgq/map_cache.hpp"
#include "sgq/parallel.hpp"
#include "sgq/traparray.hpp"

namespace fs = std::filesystem;
using namespace sgq;

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out_dir;
    std::optional<int> table;
    std::vector<double> orders;
    std::string variant;
    bool aligned = false;
};

struct Context {
    AppConfig cfg;
    fs::path out;
    unsigned threads;
    std::unique_ptr<MapCache> maps;
};

class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Writes through a sibling temporary so a failed run never leaves a partial file.
void write_file(const fs::path& path, const std::string& text) {
    const fs::path dir = path.parent_path();
    if (!dir.empty() && !fs::is_directory(dir))
        throw RuntimeFailure("output directory does not exist: " + dir.string());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw RuntimeFailure("cannot write " + tmp.string());
        f << text;
        f.close();
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw RuntimeFailure("write failed for " + path.string());
        }
    }
    fs::rename(tmp, path);
    fmt::print("wrote {}\n", path.string());
}

std::string order_tag(double n) {
    auto s = fmt::format("{:g}", n);
    for (char& c : s)
        if (c == '.') c = 'p';
    return "n" + s;
}

std::vector<double> config_orders(const Context& ctx) {
    std::vector<double> v;
    for (const auto& b : ctx.cfg.beams.orders) v.push_back(b.order);
    return v;
}

QuadratureSpec quad_for(const Context& ctx, const BeamSpec& beam) {
    return QuadratureSpec::for_beam(beam, ctx.cfg.beams.amplitude_floor, ctx.cfg.beams.spacing_wavelengths);
}

// Analytic Gaussian for n = 2, propagated map otherwise.
AddressingBeam addressing_beam(Context& ctx, double order, const GridSpec& grid) {
    const BeamSpec spec = beam_spec(ctx.cfg, order);
    if (order == 2.0) return AddressingBeam(spec);
    return AddressingBeam(spec, ctx.maps->get(spec, grid, quad_for(ctx, spec)));
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return v;
}

std::string scan_csv(const std::string& offset_col, const std::vector<double>& offsets,
                     const std::vector<double>& orders, const std::vector<std::vector<double>>& cols,
                     const std::string& prefix) {
    std::string out = offset_col;
    for (double n : orders) out += "," + prefix + order_tag(n);
    out += "\n";
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        out += fmt::format("{:.6g}", offsets[i] * 1e6);
        for (const auto& c : cols) out += fmt::format(",{:.10g}", c[i]);
        out += "\n";
    }
    return out;
}

int cmd_beam_map(Context& ctx, const Options& opt) {
    const auto orders = opt.orders.empty() ? config_orders(ctx) : opt.orders;
    const GridSpec grid = grid_spec(ctx.cfg);
    const auto rg = grid.r_grid(), zg = grid.z_grid();

    std::string profiles = "r_um";
    for (double n : orders) profiles += ",I_" + order_tag(n);
    profiles += "\n";
    for (double r : linspace(0.0, 6e-6, 601)) {
        profiles += fmt::format("{:.4f}", r * 1e6);
        for (double n : orders) {
            const double a = boundary_amplitude(r, beam_spec(ctx.cfg, n));
            profiles += fmt::format(",{:.10g}", a * a);
        }
        profiles += "\n";
    }
    write_file(ctx.out / "waist_profiles.csv", profiles);

    for (double n : orders) {
        const BeamSpec spec = beam_spec(ctx.cfg, n);
        const QuadratureSpec quad = quad_for(ctx, spec);
        const auto map = ctx.maps->get(spec, grid, quad);
        const bool gaussian = n == 2.0;

        std::string m = gaussian ? "r_um,z_um,intensity,intensity_analytic\n" : "r_um,z_um,intensity\n";
        for (std::size_t iz = 0; iz < zg.size(); ++iz)
            for (std::size_t ir = 0; ir < rg.size(); ++ir) {
                m += fmt::format("{:.4f},{:.4f},{:.10g}", rg[ir] * 1e6, zg[iz] * 1e6, map->node(ir, iz));
                if (gaussian) m += fmt::format(",{:.10g}", gaussian_intensity({rg[ir], 0.0, zg[iz]}, spec));
                m += "\n";
            }
        write_file(ctx.out / fmt::format("map_{}.csv", order_tag(n)), m);

        // Out to 100 um the on-axis cut is evaluated directly rather than from the map.
        const auto zs = linspace(0.0, 100e-6, 1001);
        std::vector<double> onaxis(zs.size());
        parallel_for(zs.size(), ctx.threads, [&](std::size_t i) {
            onaxis[i] = zs[i] == 0.0 ? 1.0 : std::norm(rs_field_at({0.0, 0.0, zs[i]}, spec, quad));
        });
        std::string a = gaussian ? "z_um,intensity,intensity_analytic\n" : "z_um,intensity\n";
        for (std::size_t i = 0; i < zs.size(); ++i) {
            a += fmt::format("{:.4f},{:.10g}", zs[i] * 1e6, onaxis[i]);
            if (gaussian) a += fmt::format(",{:.10g}", gaussian_intensity({0.0, 0.0, zs[i]}, spec));
            a += "\n";
        }
        write_file(ctx.out / fmt::format("onaxis_{}.csv", order_tag(n)), a);

        std::string rad = "r_um,intensity_z0um,intensity_z5um\n";
        for (double r : rg)
            rad += fmt::format("{:.4f},{:.10g},{:.10g}\n", r * 1e6, map->at(r, 0.0), map->at(r, 5e-6));
        write_file(ctx.out / fmt::format("radial_{}.csv", order_tag(n)), rad);
    }
    return 0;
}

int cmd_crosstalk(Context& ctx, const Options&) {
    const auto orders = config_orders(ctx);
    const double d = ctx.cfg.trap.period_um * 1e-6;
    const double r0 = ctx.cfg.beams.jitter_nm * 1e-9;
    const GridSpec grid = grid_spec(ctx.cfg);

    std::vector<AddressingBeam> beams;
    for (double n : orders) beams.push_back(addressing_beam(ctx, n, grid));

    std::string t1 = "n,width_um,crosstalk_aligned,crosstalk_at_jitter\n";
    for (std::size_t i = 0; i < orders.size(); ++i) {
        const double aligned = crosstalk_scan(beams[i], d, ScanAxis::radial, std::vector<double>{0.0})[0];
        const double jitter = crosstalk_scan(beams[i], d, ScanAxis::radial, std::vector<double>{r0})[0];
        t1 += fmt::format("{:g},{:.4f},{:.6g},{:.6g}\n", orders[i], beams[i].spec().waist_w * 1e6, aligned, jitter);
    }
    write_file(ctx.out / "table1.csv", t1);

    const auto axial = linspace(0.0, 6e-6, 241);
    const auto radial = linspace(0.0, 0.5e-6, 201);
    std::vector<std::vector<double>> ax, rad;
    for (const auto& b : beams) {
        ax.push_back(crosstalk_scan(b, d, ScanAxis::axial, axial));
        rad.push_back(crosstalk_scan(b, d, ScanAxis::radial, radial));
    }
    write_file(ctx.out / "crosstalk_axial.csv", scan_csv("offset_z_um", axial, orders, ax, "I_"));
    write_file(ctx.out / "crosstalk_radial.csv", scan_csv("offset_x_um", radial, orders, rad, "I_"));

    std::size_t gauss = orders.size();
    for (std::size_t i = 0; i < orders.size(); ++i)
        if (orders[i] == 2.0) gauss = i;
    if (gauss == orders.size()) throw ConfigError("crossovers need order 2 among beams.orders");
    std::string cx = "axis,n,offset_um\n";
    for (std::size_t i = 0; i < orders.size(); ++i) {
        if (i == gauss || orders[i] > 8.0) continue;
        const double z = crosstalk_crossover(beams[i], beams[gauss], d, ScanAxis::axial, 0.0, 6e-6);
        const double x = crosstalk_crossover(beams[i], beams[gauss], d, ScanAxis::radial, 0.0, 0.5e-6);
        cx += fmt::format("axial,{:g},{:.6g}\nradial,{:g},{:.6g}\n", orders[i], z * 1e6, orders[i], x * 1e6);
    }
    write_file(ctx.out / "crossovers.csv", cx);
    return 0;
}

Vec3 psi_widths(const AppConfig& cfg) {
    const auto h = trap_harmonics(trap_config(cfg), cfg.ensemble.temperature_uK * 1e-6);
    return {h.sigma_x, h.sigma_y, h.sigma_z};
}

int cmd_variance(Context& ctx, const Options& opt) {
    const Vec3 w = psi_widths(ctx.cfg);
    const int order = ctx.cfg.analysis.hermite_order;
    const GridSpec grid = grid_spec(ctx.cfg);
    const bool want2 = !opt.table || *opt.table == 2, want3 = !opt.table || *opt.table == 3;

    auto table = [&](const std::vector<double>& orders) {
        std::string t = "n,width_um,sigma_IPsi\n";
        for (double n : orders) {
            VarianceRequest req{addressing_beam(ctx, n, grid), w, order};
            t += fmt::format("{:g},{:.4f},{:.6g}\n", n, req.beam.spec().waist_w * 1e6, intensity_variance(req));
        }
        return t;
    };
    if (want2) write_file(ctx.out / "table2.csv", table(config_orders(ctx)));
    if (want3) write_file(ctx.out / "table3.csv", table({5.5, 6.0, 6.5, 7.0, 7.5}));
    if (opt.aligned || opt.table) return 0;

    const std::vector<double> orders{2.0, 4.0, 6.0, 8.0};
    const double d = ctx.cfg.trap.period_um * 1e-6;
    const auto radial = linspace(0.0, d, 191);
    const auto axial = linspace(0.0, 10e-6, 201);
    GridSpec tall = grid;
    tall.z_max = std::max(grid.z_max, 20e-6);
    std::vector<std::vector<double>> rad, ax;
    for (double n : orders) {
        rad.push_back(variance_scan({addressing_beam(ctx, n, grid), w, order}, ScanAxis::radial, radial, ctx.threads));
        ax.push_back(variance_scan({addressing_beam(ctx, n, tall), w, order}, ScanAxis::axial, axial, ctx.threads));
    }
    write_file(ctx.out / "variance_radial.csv", scan_csv("offset_x_um", radial, orders, rad, "sigma_IPsi_"));
    write_file(ctx.out / "variance_axial.csv", scan_csv("offset_z_um", axial, orders, ax, "sigma_IPsi_"));
    return 0;
}

void print_warnings(const std::vector<std::string>& w, const std::string& label) {
    for (const auto& s : w) fmt::print(stderr, "warning [{}]: {}\n", label, s);
}

int write_sweep(Context& ctx, const std::vector<Scenario>& scenarios) {
    const auto items = sweep(scenarios, *ctx.maps, ctx.threads);
    int failures = 0;
    for (const auto& it : items) {
        if (!it.result) {
            fmt::print(stderr, "error [{}]: {}\n", it.scenario.label, it.error);
            ++failures;
            continue;
        }
        print_warnings(it.result->warnings, it.scenario.label);
        write_file(ctx.out / fmt::format("pop_{}.csv", it.scenario.label), population_csv(*it.result));
    }
    write_file(ctx.out / "summary.csv", summary_csv(items));
    return failures == 0 ? 0 : 2;
}

int cmd_rabi(Context& ctx, const Options& opt) {
    ScenarioOverride o;
    if (!opt.orders.empty()) o.order = opt.orders.front();
    const Scenario s = apply_override(ctx.cfg, o);
    return write_sweep(ctx, {s});
}

int cmd_sweep(Context& ctx, const Options& opt) {
    std::vector<ScenarioOverride> rows;
    if (opt.table) rows = table_rows(*opt.table);
    else if (!opt.variant.empty()) rows = variant_rows(opt.variant);
    else rows = ctx.cfg.sweep;
    std::vector<Scenario> scenarios;
    for (const auto& r : rows) scenarios.push_back(apply_override(ctx.cfg, r));
    return write_sweep(ctx, scenarios);
}

int cmd_constants(Context& ctx, const Options&) {
    const auto& cfg = ctx.cfg;
    const TrapConfig trap = trap_config(cfg);
    const double T = cfg.ensemble.temperature_uK * 1e-6;
    const auto h = trap_harmonics(trap, T);
    const RamanConfig raman = raman_config(cfg);
    TrapConfig stark_trap = trap;
    stark_trap.model = cfg.trap.stark_model;
    const TrapField field(stark_trap);
    auto khz = [](double w) { return w / phys::two_pi * 1e-3; };

    std::string s = "quantity,value,unit\n";
    auto row = [&s](const std::string& q, double v, const std::string& u) {
        s += fmt::format("{},{:.8g},{}\n", q, v, u);
    };
    for (const auto& b : cfg.beams.orders) row("width_" + order_tag(b.order), beam_width(cfg, b.order) * 1e6, "um");
    row("trap_s", trap.s(), "1");
    row("omega_x", khz(h.omega_x), "kHz");
    row("omega_z", khz(h.omega_z), "kHz");
    row("sigma_x", h.sigma_x * 1e6, "um");
    row("sigma_z", h.sigma_z * 1e6, "um");
    row("trap_depth_scale", trap.depth_scale() / phys::kB * 1e6, "uK");
    row("trap_stark_center", khz(field.stark_shift({})), "kHz");
    row("single_photon_rabi", khz(raman.rabi1()), "kHz");
    row("raman_detuning", khz(raman.detuning_R) * 1e-6, "GHz");
    row("rabi_center", khz(raman.center_rabi()), "kHz");
    row("raman_stark_center", khz(raman.center_stark_shift()), "kHz");
    row("pi_time_center", phys::pi / std::abs(raman.center_rabi()) * 1e6, "us");
    std::cout << s;
    write_file(ctx.out / "constants.csv", s);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Super-Gaussian addressing beams and Raman Rabi oscillations of trapped Cs atoms"};
    app.require_subcommand(0, 1);
    app.fallthrough();
    Options opt;
    app.add_option("--config", opt.config_path, "YAML configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", opt.seed, "RNG seed (overrides rng_seed)");
    app.add_option("--threads", opt.threads, "worker threads (0: hardware concurrency)");
    app.add_option("--out", opt.out_dir, "output directory (must exist; overrides output.dir)");
    app.add_option("--table", opt.table, "preset: 1 crosstalk, 2/3 variance, 4/5/6 sweep")
        ->check(CLI::Range(1, 6));

    auto* beam_map = app.add_subcommand("beam-map", "intensity maps and cuts");
    beam_map->add_option("--order", opt.orders, "beam order(s); default: beams.orders");
    auto* crosstalk = app.add_subcommand("crosstalk", "neighbor-site crosstalk");
    auto* variance = app.add_subcommand("variance", "density-weighted intensity variance");
    variance->add_flag("--aligned", opt.aligned, "aligned tables only, no scans");
    auto* rabi = app.add_subcommand("rabi", "single Monte Carlo scenario from the ensemble block");
    rabi->add_option("--order", opt.orders, "beam order")->expected(1);
    auto* sweep_cmd = app.add_subcommand("sweep", "scenario sweep");
    sweep_cmd->add_option("--variant", opt.variant, "jitter, noise or detuning");
    auto* constants = app.add_subcommand("constants", "derived trap and Raman constants");
    for (auto* sub : {variance, sweep_cmd}) sub->add_option("--table", opt.table)->check(CLI::Range(1, 6));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (app.get_subcommands().empty() && !opt.table) {
        std::cout << app.help();
        return 1;
    }

    try {
        Context ctx;
        ctx.cfg = opt.config_path.empty() ? AppConfig{} : load_config(opt.config_path);
        if (opt.seed) ctx.cfg.rng_seed = *opt.seed;
        validate_config(ctx.cfg);
        ctx.out = opt.out_dir.empty() ? fs::path(ctx.cfg.output.dir) : fs::path(opt.out_dir);
        ctx.threads = opt.threads;
        if (!fs::is_directory(ctx.out)) throw RuntimeFailure("output directory does not exist: " + ctx.out.string());
        fs::path cache_dir = ctx.cfg.output.map_cache;
        if (!cache_dir.empty()) fs::create_directories(cache_dir);
        ctx.maps = std::make_unique<MapCache>(cache_dir, ctx.threads);

        auto check_table = [&](std::initializer_list<int> allowed, const char* cmd) {
            if (!opt.table) return;
            for (int t : allowed)
                if (*opt.table == t) return;
            throw ConfigError(fmt::format("--table {} does not apply to {}", *opt.table, cmd));
        };

        if (beam_map->parsed()) return cmd_beam_map(ctx, opt);
        if (crosstalk->parsed()) {
            check_table({1}, "crosstalk");
            return cmd_crosstalk(ctx, opt);
        }
        if (variance->parsed()) {
            check_table({2, 3}, "variance");
            return cmd_variance(ctx, opt);
        }
        if (rabi->parsed()) return cmd_rabi(ctx, opt);
        if (sweep_cmd->parsed()) {
            check_table({4, 5, 6}, "sweep");
            if (opt.table && !opt.variant.empty()) throw ConfigError("--table and --variant are exclusive");
            return cmd_sweep(ctx, opt);
        }
        if (constants->parsed()) return cmd_constants(ctx, opt);
        // Bare --table N picks the matching command.
        if (*opt.table == 1) return cmd_crosstalk(ctx, opt);
        if (*opt.table <= 3) return cmd_variance(ctx, opt);
        return cmd_sweep(ctx, opt);
    } catch (const ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
}
