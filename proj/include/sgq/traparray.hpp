#pragma once

#include "sgq/vec3.hpp"

namespace sgq {

enum class TrapModel { four_beam, harmonic };

// One unit cell of a blue-detuned array: four Gaussian beams along +z with
// axes at (+-d/2, +-d/2), summed incoherently. The atom sits at the dark
// center (0, 0, 0).
struct TrapConfig {
    double period_d = 3.8e-6;            // m
    double trap_waist_w0 = 1.73e-6;      // m
    double trap_wavelength = 780e-9;     // m
    double power_per_beam_P = 0.047;     // W
    double polarizability_alpha;         // SI, negative for blue detuning
    double atom_mass;                    // kg
    TrapModel model = TrapModel::harmonic;

    TrapConfig();
    void validate() const;

    double s() const { return period_d / trap_waist_w0; }
    // U_d = alpha / (2 eps0 c) * P / d^2 (J).
    double depth_scale() const;
};

struct SpringConstants {
    double kappa_x, kappa_y, kappa_z;    // N/m
};

struct TrapHarmonics {
    double kappa_x, kappa_y, kappa_z;    // N/m
    double omega_x, omega_y, omega_z;    // rad/s
    double sigma_x, sigma_y, sigma_z;    // m
    double temperature;                  // K
};

// Analytic spring constants of the four-beam cell. Signs follow (s^2 - 1), so
// s <= 1 gives kappa <= 0 rather than an error.
SpringConstants spring_constants(const TrapConfig& cfg);

// Throws std::domain_error when s^2 <= 1 (no confinement).
TrapHarmonics trap_harmonics(const TrapConfig& cfg, double temperature);

// W/m^2; valid in either model.
double unit_cell_intensity(const Vec3& point, const TrapConfig& cfg);

struct PotentialForce {
    double potential;   // J
    Vec3 force;         // N
};

// Evaluates the configured model with its constants computed once. HARMONIC is
// offset so U(0) = 0; FOUR_BEAM returns -alpha/(2 eps0 c) I_T.
class TrapField {
public:
    explicit TrapField(const TrapConfig& cfg);

    PotentialForce operator()(const Vec3& point) const;
    Vec3 force(const Vec3& point) const;
    // Differential ground-state light shift Delta_hf/Delta_T * U_T/hbar (rad/s).
    double stark_shift(const Vec3& point) const;
    const TrapConfig& config() const { return cfg_; }

private:
    TrapConfig cfg_;
    SpringConstants k_;
    double i0_;       // peak intensity of one beam
    double zr_;       // Rayleigh range
    double u_per_i_;  // U_T per unit intensity
    double stark_per_u_;
};

PotentialForce trap_potential_and_force(const Vec3& point, const TrapConfig& cfg);
double trap_stark_shift(const Vec3& point, const TrapConfig& cfg);

// 1/Delta_T = (1/3)/Delta_D1 + (2/3)/Delta_D2 for the trap wavelength (rad/s).
double trap_effective_detuning(double trap_wavelength);

}  // namespace sgq
