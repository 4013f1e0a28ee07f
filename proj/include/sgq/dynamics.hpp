#pragma once

#include <array>
#include <complex>
#include <functional>
#include <utility>

#include "sgq/beamoptics.hpp"
#include "sgq/cesium.hpp"
#include "sgq/traparray.hpp"
#include "sgq/vec3.hpp"

namespace sgq {

using cplx = std::complex<double>;

// Row-major 2x2 matrix acting on (c_g, c_e).
using Mat2 = std::array<cplx, 4>;

Mat2 operator*(const Mat2& a, const Mat2& b);

struct SpinState {
    cplx c_g{1.0, 0.0};   // F = 3
    cplx c_e{0.0, 0.0};   // F = 4

    double norm() const { return std::norm(c_g) + std::norm(c_e); }
    double excited_population() const { return std::norm(c_e); }
};

struct LocalControls {
    double rabi = 0.0;      // Omega, rad/s
    double detuning = 0.0;  // Delta, rad/s
};

// Interaction-picture propagator from t0 to t for constant (Omega, Delta).
// The phase factors depend on t and t0 individually, not only on t - t0.
Mat2 propagator(double rabi, double detuning, double t0, double t);

// (|c_g|^2, |c_e|^2) at time t for an atom starting in |g> at t = 0.
std::pair<double, double> analytic_populations(double rabi, double detuning, double t);

// Advances the state from absolute time t to t + dt.
SpinState evolve(const SpinState& state, const LocalControls& controls, double t, double dt);

using IntensityField = std::function<double(const Vec3&)>;

// Everything local_controls needs for one scenario. The reference is the
// total differential shift of an atom at the trap center with aligned beams,
// so Delta vanishes there.
struct ControlContext {
    IntensityField beam;         // normalized I_n in the trap frame, offsets included
    TrapConfig stark_trap;       // evaluated in its own model for Delta_acT
    double rabi_center = 0.0;    // Omega at I_n = 1
    double stark_center = 0.0;   // Delta_acR at I_n = 1
    double reference = 0.0;

    static ControlContext calibrate(IntensityField beam, const TrapConfig& stark_trap, const RamanConfig& raman);
};

// power_factor scales both Raman intensities (Omega and Delta_acR are linear in it).
LocalControls local_controls(const Vec3& position, const ControlContext& ctx, double power_factor = 1.0);

// Same, reusing a prebuilt trap field for the Stark term.
LocalControls local_controls(const Vec3& position, const ControlContext& ctx, const TrapField& stark_field,
                             double power_factor = 1.0);

}  // namespace sgq
