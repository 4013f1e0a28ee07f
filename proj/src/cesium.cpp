#include "sgq/cesium.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "sgq/angular.hpp"
#include "sgq/constants.hpp"

namespace sgq {

using phys::two_pi;

const CesiumConstants& cesium() {
    static const CesiumConstants k{
        .hyperfine_splitting = two_pi * 9.192631770e9,
        .excited_shift_F3 = -two_pi * 212.3e6,
        .excited_shift_F4 = two_pi * 165.1e6,
        .reduced_dipole = 0.276 * phys::e_charge * phys::a0,
        .d1_wavelength = 894e-9,
        .d2_wavelength = 852e-9,
        .polarizability_780 = polarizability_cgs_to_si(-250e-24),
        .mass = 132.905451961 * phys::amu,
        .nuclear_spin = 3.5,
        .ground_j = 0.5,
        .excited_j = 0.5,
    };
    return k;
}

double polarizability_cgs_to_si(double alpha_cm3) {
    return 4.0 * phys::pi * phys::eps0 * alpha_cm3 * 1e-6;
}

double angular_factor(double J1, double I, double F_i, double Jp, double F_j, double m_F, int q) {
    const double phase_exp = 1.0 + I + F_i + Jp;
    const long k = std::lround(phase_exp);
    if (std::abs(phase_exp - static_cast<double>(k)) > 1e-9)
        throw angular::AngularMomentumError(
            fmt::format("1 + I + F_i + J' = {} is not an integer", phase_exp));
    const double phase = (k % 2 == 0) ? 1.0 : -1.0;
    const double c = phase * std::sqrt(2.0 * F_i + 1.0) * angular::wigner_6j(J1, I, F_i, F_j, 1.0, Jp);
    return c * angular::clebsch_gordan(F_i, m_F, 1.0, q, F_j, m_F + q);
}

double single_photon_rabi(double intensity) {
    if (!(intensity >= 0.0)) throw std::invalid_argument("intensity must be non-negative");
    const double field = std::sqrt(2.0 * intensity / (phys::eps0 * phys::c));
    return cesium().reduced_dipole * field / phys::hbar;
}

namespace {

double checked_inverse(double detuning) {
    if (std::abs(detuning) <= 1e-12 * cesium().hyperfine_splitting)
        throw ResonanceError(fmt::format("Raman detuning hits a pole (denominator {:.6g} rad/s)", detuning));
    return 1.0 / detuning;
}

// Sum 1/(x - D_F'3) + (5/3)/(x - D_F'4).
double pole_pair(double x) {
    const auto& cs = cesium();
    return checked_inverse(x - cs.excited_shift_F3) + (5.0 / 3.0) * checked_inverse(x - cs.excited_shift_F4);
}

}  // namespace

double two_photon_rabi(double rabi1, double rabi2, double delta_R) {
    return rabi1 * rabi2 / 32.0 * pole_pair(delta_R);
}

double raman_stark_shift(double rabi1, double rabi2, double delta_R) {
    const double hf = cesium().hyperfine_splitting;
    const double w1 = rabi1 * rabi1 / 64.0;
    const double w2 = rabi2 * rabi2 / 64.0;
    const double shift3 = w1 * pole_pair(delta_R) + w2 * pole_pair(delta_R - hf);
    const double shift4 = w1 * pole_pair(delta_R + hf) + w2 * pole_pair(delta_R);
    return shift4 - shift3;
}

namespace {

double excited_shift(double Fp) {
    return Fp == 3.0 ? cesium().excited_shift_F3 : cesium().excited_shift_F4;
}

double ground_leg_shift(double F, double rabi, double delta_R, double offset) {
    const auto& cs = cesium();
    double shift = 0.0;
    for (double Fp : {3.0, 4.0}) {
        const double t = angular_factor(cs.ground_j, cs.nuclear_spin, F, cs.excited_j, Fp, 0.0, 1);
        const double coupling = rabi * t;
        shift += coupling * coupling / 4.0 * checked_inverse(delta_R - excited_shift(Fp) + offset);
    }
    return shift;
}

}  // namespace

double two_photon_rabi_termwise(double rabi1, double rabi2, double delta_R) {
    const auto& cs = cesium();
    double sum = 0.0;
    for (double Fp : {3.0, 4.0}) {
        const double up = angular_factor(cs.ground_j, cs.nuclear_spin, 3.0, cs.excited_j, Fp, 0.0, 1);
        const double down = angular_factor(cs.excited_j, cs.nuclear_spin, Fp, cs.ground_j, 4.0, 1.0, -1);
        sum += (rabi1 * up) * (rabi2 * down) / 2.0 * checked_inverse(delta_R - excited_shift(Fp));
    }
    return sum;
}

double raman_stark_shift_termwise(double rabi1, double rabi2, double delta_R) {
    const double hf = cesium().hyperfine_splitting;
    // Beam 2 is one hyperfine splitting below beam 1.
    const double shift3 = ground_leg_shift(3.0, rabi1, delta_R, 0.0) + ground_leg_shift(3.0, rabi2, delta_R, -hf);
    const double shift4 = ground_leg_shift(4.0, rabi1, delta_R, hf) + ground_leg_shift(4.0, rabi2, delta_R, 0.0);
    return shift4 - shift3;
}

double detuning_from_f4(double delta_f4) { return delta_f4 + cesium().excited_shift_F4; }

double RamanConfig::center_intensity1() const {
    return 2.0 * power1 / (phys::pi * reference_waist * reference_waist);
}
double RamanConfig::center_intensity2() const {
    return 2.0 * power2 / (phys::pi * reference_waist * reference_waist);
}
double RamanConfig::rabi1() const { return single_photon_rabi(center_intensity1()); }
double RamanConfig::rabi2() const { return single_photon_rabi(center_intensity2()); }
double RamanConfig::center_rabi() const { return two_photon_rabi(rabi1(), rabi2(), detuning_R); }
double RamanConfig::center_stark_shift() const { return raman_stark_shift(rabi1(), rabi2(), detuning_R); }

std::vector<std::string> RamanConfig::validate() const {
    if (!std::isfinite(detuning_R)) throw std::invalid_argument("Raman detuning must be finite");
    if (!(power1 >= 0.0) || !(power2 >= 0.0)) throw std::invalid_argument("Raman powers must be non-negative");
    if (!(reference_waist > 0.0)) throw std::invalid_argument("Raman reference waist must be positive");
    // Evaluates every denominator once so poles surface as ResonanceError.
    (void)center_rabi();
    (void)center_stark_shift();

    std::vector<std::string> warnings;
    const auto& cs = cesium();
    const double nearest = std::min(std::abs(detuning_R - cs.excited_shift_F3),
                                    std::abs(detuning_R - cs.excited_shift_F4));
    const double strongest = std::max(rabi1(), rabi2());
    if (nearest < 100.0 * strongest)
        warnings.push_back(fmt::format(
            "Raman detuning {:.4g} GHz is within 100x of the single-photon Rabi frequency {:.4g} MHz",
            nearest / two_pi * 1e-9, strongest / two_pi * 1e-6));
    return warnings;
}

}  // namespace sgq
