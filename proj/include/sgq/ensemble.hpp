#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sgq/analysis.hpp"
#include "sgq/beamoptics.hpp"
#include "sgq/cesium.hpp"
#include "sgq/dynamics.hpp"
#include "sgq/map_cache.hpp"
#include "sgq/traparray.hpp"

namespace sgq {

struct Scenario {
    std::string label;
    double temperature = 20e-6;        // K
    BeamSpec beam;                     // order, width; offset_x and offset_z_waist are the misalignment
    RamanConfig raman;
    TrapConfig trap;                   // model drives the motion
    TrapModel stark_model = TrapModel::four_beam;
    double noise_fraction = 0.0;       // full width of the uniform power factor
    int n_atoms = 100;
    int n_repeats = 10;
    double dt = 1e-6;                  // s
    double t_total = 150e-6;           // s
    int substeps = 200;                // velocity Verlet steps per dt (even)
    std::uint64_t rng_seed = 1;
    double thompson_alpha = 0.05;
    GridSpec grid;                     // minimum map grid; extended to cover the atom cloud
    double amplitude_floor = 1e-8;
    double spacing_fraction = 0.25;

    // Throws std::invalid_argument; returns soft warnings.
    std::vector<std::string> validate() const;
    int steps() const;
};

// Map grid that contains every plausible atom position: 8 thermal widths
// beyond the beam offset in each direction, rounded up to whole micrometres.
GridSpec map_grid_for(const Scenario& s);

struct PhaseSpace {
    Vec3 r;   // m
    Vec3 v;   // m/s
};

// Per-atom generator keyed by (seed, repeat, atom), independent of scheduling.
std::mt19937_64 atom_rng(std::uint64_t seed, std::uint64_t repeat, std::uint64_t atom);

// Thermal position (variance k_B T / kappa_j) and Maxwellian velocity
// (variance k_B T / m = omega_j^2 sigma_j^2).
PhaseSpace sample_initial(double temperature, const TrapHarmonics& harmonics, std::mt19937_64& rng);

// Velocity Verlet over `duration` in `substeps` equal steps.
PhaseSpace advance(PhaseSpace s, double duration, int substeps, const TrapField& field, double mass);

struct Trajectory {
    std::vector<PhaseSpace> grid;   // states at k dt, k = 0..n
    std::vector<Vec3> midpoints;    // positions at (k + 1/2) dt, k = 0..n-1
};

Trajectory integrate_trajectory(const PhaseSpace& initial, const TrapField& field, double mass, double dt,
                                double t_total, int substeps = 200);

struct Stat {
    double mean = 0.0;
    double std = 0.0;   // sample standard deviation across retained repeats
};

struct RepeatResult {
    std::vector<double> mean_pop;
    std::vector<double> sigma_pop;
    FitResult fit;
    double t_pi = 0.0;             // pi / Omega' of this repeat's fit
    double pi_pop = 0.0;
    double three_pi_pop = 0.0;
    double mean_init_stark = 0.0;  // <Delta_acR> at the initial positions, rad/s
    double mean_init_rabi = 0.0;   // <Omega> at the initial positions, rad/s
    double mean_init_trap_stark = 0.0;  // <Delta_acT(r)>, rad/s, including the center value
};

struct EnsembleSummary {
    Stat stark;            // rad/s
    Stat rabi;             // rad/s
    Stat omega_prime;      // rad/s
    Stat t_a;              // s
    Stat t_a_over_pi;      // t_a / (100 t_pi)
    Stat pi_pop;
    Stat three_pi_pop;
    Stat trap_stark;       // rad/s
    int used_repeats = 0;
    int failed_fits = 0;
    int outliers = 0;
};

struct EnsembleResult {
    Scenario scenario;
    std::vector<double> times;       // s
    std::vector<double> mean_pop;    // representative repeat (index 0)
    std::vector<double> sigma_pop;
    double mean_init_stark = 0.0;    // over all atoms of all repeats
    double mean_init_rabi = 0.0;
    double calibration_rabi = 0.0;   // Omega at the aligned trap center
    double calibration_stark = 0.0;  // Delta_acR at the aligned trap center
    std::vector<RepeatResult> repeats;
    EnsembleSummary summary;
    std::vector<std::string> warnings;
};

EnsembleResult run_scenario(const Scenario& s, MapCache& maps, unsigned threads = 0);

struct SweepItem {
    Scenario scenario;
    std::optional<EnsembleResult> result;
    std::string error;
};

// Runs every scenario; (scenario, repeat, atom) tasks share one worker pool.
// Failures are isolated per scenario.
std::vector<SweepItem> sweep(std::span<const Scenario> scenarios, MapCache& maps, unsigned threads = 0);

// CSV renderings shared by the CLI and the tests.
std::string population_csv(const EnsembleResult& r);
std::string summary_csv(std::span<const SweepItem> items);

}  // namespace sgq
