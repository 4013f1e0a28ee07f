#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgq/beamoptics.hpp"
#include "sgq/ensemble.hpp"
#include "sgq/traparray.hpp"

namespace sgq {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Values are held in the file's units (um, nm, uK, ...) so that dumping a
// loaded file reproduces it exactly; conversion to SI happens on use.
struct BeamEntry {
    double order = 2.0;
    std::optional<double> width_um;   // empty: Gaussian waist for n = 2, width rule otherwise
};

struct ScenarioOverride {
    std::string label;
    std::optional<double> order;
    std::optional<double> temperature_uK;
    std::optional<double> offset_x_um;
    std::optional<double> offset_z_um;
    std::optional<double> noise_fraction;
    std::optional<double> detuning_GHz;
    std::optional<double> power_uW;
};

enum class DetuningReference { f4, fine_structure };

struct AppConfig {
    std::uint64_t rng_seed = 1;

    struct Trap {
        double period_um = 3.8;
        double waist_um = 1.73;
        double wavelength_nm = 780.0;
        double power_per_beam_W = 0.047;
        double polarizability_A3 = -250.0;   // 1e-24 cm^3
        TrapModel motion_model = TrapModel::harmonic;
        TrapModel stark_model = TrapModel::four_beam;
    } trap;

    struct Beams {
        double wavelength_nm = 459.0;
        double gaussian_waist_um = 2.30;
        double jitter_nm = 150.0;
        std::vector<BeamEntry> orders{{2.0, {}}, {4.0, {}}, {6.0, {}}, {8.0, {}}, {10.0, {}}};
        double r_max_um = 8.0;
        double dr_nm = 40.0;
        double z_max_um = 12.0;
        double dz_nm = 100.0;
        double amplitude_floor = 1e-8;
        double spacing_wavelengths = 0.25;
    } beams;

    struct Raman {
        double power_uW = 5.0;
        double detuning_GHz = 20.0;
        DetuningReference reference = DetuningReference::f4;
    } raman;

    struct Ensemble {
        double temperature_uK = 20.0;
        double order = 2.0;
        double offset_x_um = 0.0;
        double offset_z_um = 0.0;
        double noise_fraction = 0.0;
        int n_atoms = 100;
        int n_repeats = 10;
        double dt_us = 1.0;
        double t_total_us = 150.0;
        int substeps = 200;
    } ensemble;

    struct Analysis {
        double thompson_alpha = 0.05;
        int hermite_order = 40;
    } analysis;

    struct Output {
        std::string dir = "out";
        std::string map_cache;   // empty: in-memory only
    } output;

    std::vector<ScenarioOverride> sweep;
};

AppConfig parse_config(const std::string& yaml_text);
AppConfig load_config(const std::filesystem::path& path);
std::string dump_config(const AppConfig& cfg);

// Validates every physical invariant reachable from the config.
void validate_config(const AppConfig& cfg);

TrapConfig trap_config(const AppConfig& cfg);
double beam_width(const AppConfig& cfg, double order);   // m
BeamSpec beam_spec(const AppConfig& cfg, double order);
GridSpec grid_spec(const AppConfig& cfg);
RamanConfig raman_config(const AppConfig& cfg, std::optional<double> detuning_GHz = {},
                         std::optional<double> power_uW = {});

Scenario base_scenario(const AppConfig& cfg);
Scenario apply_override(const AppConfig& cfg, const ScenarioOverride& o);

// Scenario rows behind the --table 4, 5 and 6 presets.
std::vector<ScenarioOverride> table_rows(int table);

// Extra runs discussed alongside the tables: "jitter" (150 nm radial offset),
// "noise" (2% power noise) and "detuning" (100 GHz with 5x power).
std::vector<ScenarioOverride> variant_rows(const std::string& name);

}  // namespace sgq
