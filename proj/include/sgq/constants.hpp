#pragma once

#include <numbers>

// SI values, CODATA 2018.
namespace sgq::phys {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double eps0 = 8.8541878128e-12;         // F/m
inline constexpr double c = 299792458.0;                 // m/s
inline constexpr double e_charge = 1.602176634e-19;      // C
inline constexpr double a0 = 5.29177210903e-11;          // m
inline constexpr double kB = 1.380649e-23;               // J/K
inline constexpr double amu = 1.66053906660e-27;         // kg

}  // namespace sgq::phys
