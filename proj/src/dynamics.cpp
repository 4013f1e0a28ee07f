#include "sgq/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace sgq {

Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Mat2 propagator(double rabi, double detuning, double t0, double t) {
    if (t < t0) throw std::invalid_argument("propagator requires t >= t0");
    const double tau = t - t0;
    const double wp = std::sqrt(rabi * rabi + detuning * detuning);
    if (wp == 0.0) return {1.0, 0.0, 0.0, 1.0};

    const double half = 0.5 * wp * tau;
    const double c = std::cos(half);
    const double s = std::sin(half);
    const double d_ratio = detuning / wp;
    const double o_ratio = rabi / wp;
    const cplx i(0.0, 1.0);
    const cplx diag_phase = std::polar(1.0, 0.5 * detuning * tau);
    const cplx off_phase = std::polar(1.0, 0.5 * detuning * (t + t0));

    return {diag_phase * cplx(c, -d_ratio * s),
            i * off_phase * (o_ratio * s),
            i * std::conj(off_phase) * (o_ratio * s),
            std::conj(diag_phase) * cplx(c, d_ratio * s)};
}

std::pair<double, double> analytic_populations(double rabi, double detuning, double t) {
    const double o2 = rabi * rabi;
    const double d2 = detuning * detuning;
    if (o2 + d2 == 0.0) return {1.0, 0.0};
    const double s = std::sin(0.5 * std::sqrt(o2 + d2) * t);
    const double excited = o2 / (o2 + d2) * s * s;
    return {1.0 - excited, excited};
}

SpinState evolve(const SpinState& state, const LocalControls& controls, double t, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("evolve requires dt > 0");
    const Mat2 m = propagator(controls.rabi, controls.detuning, t, t + dt);
    return {m[0] * state.c_g + m[1] * state.c_e, m[2] * state.c_g + m[3] * state.c_e};
}

ControlContext ControlContext::calibrate(IntensityField beam, const TrapConfig& stark_trap, const RamanConfig& raman) {
    ControlContext ctx;
    ctx.beam = std::move(beam);
    ctx.stark_trap = stark_trap;
    ctx.rabi_center = raman.center_rabi();
    ctx.stark_center = raman.center_stark_shift();
    // Aligned beams give I_n(0,0,0) = 1 by normalization.
    ctx.reference = ctx.stark_center + TrapField(stark_trap).stark_shift({});
    return ctx;
}

LocalControls local_controls(const Vec3& position, const ControlContext& ctx, const TrapField& stark_field,
                             double power_factor) {
    const double in = ctx.beam(position) * power_factor;
    return {ctx.rabi_center * in, ctx.stark_center * in + stark_field.stark_shift(position) - ctx.reference};
}

LocalControls local_controls(const Vec3& position, const ControlContext& ctx, double power_factor) {
    return local_controls(position, ctx, TrapField(ctx.stark_trap), power_factor);
}

}  // namespace sgq
