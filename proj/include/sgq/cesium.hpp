#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sgq {

// Cs-133 data for the 6S1/2 <-> 7P1/2 Raman scheme at 459 nm. Frequencies in rad/s.
struct CesiumConstants {
    double hyperfine_splitting;   // 6S1/2 F=3 <-> F=4
    double excited_shift_F3;      // 7P1/2 F'=3 relative to the fine-structure line
    double excited_shift_F4;      // 7P1/2 F'=4 relative to the fine-structure line
    double reduced_dipole;        // <7P1/2||er||6S1/2>, C m
    double d1_wavelength;         // m
    double d2_wavelength;         // m
    double polarizability_780;    // SI (C m^2/V)
    double mass;                  // kg
    double nuclear_spin;
    double ground_j;
    double excited_j;
};

const CesiumConstants& cesium();

// Converts a polarizability volume in cm^3 (cgs) to SI via alpha_SI = 4 pi eps0 alpha_cgs.
double polarizability_cgs_to_si(double alpha_cm3);

class ResonanceError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// c * C product for a dipole step F_i, m_F -> F_j, m_F + q between manifolds
// with electronic angular momenta J1 (initial) and Jp (final).
double angular_factor(double J1, double I, double F_i, double Jp, double F_j, double m_F, int q);

// Single-photon Rabi frequency on 6S1/2 -> 7P1/2 for a beam of the given intensity (W/m^2).
double single_photon_rabi(double intensity);

// Delta_R is the Raman detuning measured from the 6S1/2 F=3 -> 7P1/2 fine-structure line.
double two_photon_rabi(double rabi1, double rabi2, double delta_R);
double raman_stark_shift(double rabi1, double rabi2, double delta_R);

// Same quantities assembled term by term from angular_factor: every allowed
// F -> F' leg contributes |Omega_FF'|^2 / (4 Delta) to the light shift and the
// Lambda paths contribute Omega_3F' Omega_F'4 / (2 Delta) to the coupling.
double two_photon_rabi_termwise(double rabi1, double rabi2, double delta_R);
double raman_stark_shift_termwise(double rabi1, double rabi2, double delta_R);

// Converts a detuning measured from the F=3 -> F'=4 hyperfine line to Delta_R.
double detuning_from_f4(double delta_f4);

// Raman pair driving the qubit. Both beams share waist, wavelength and
// alignment; their spatial profile lives in the scenario's BeamSpec. The
// center intensity of each beam is that of a Gaussian of the reference waist,
// 2P/(pi w^2), for every beam order.
struct RamanConfig {
    double detuning_R = 0.0;        // rad/s, from the fine-structure line
    double power1 = 5e-6;           // W
    double power2 = 5e-6;           // W
    double reference_waist = 2.30e-6;

    double center_intensity1() const;
    double center_intensity2() const;
    double rabi1() const;
    double rabi2() const;
    double center_rabi() const;
    double center_stark_shift() const;

    // Throws std::invalid_argument on non-physical values and returns any
    // soft-limit warnings (adiabatic elimination margin below 100x).
    std::vector<std::string> validate() const;
};

}  // namespace sgq
