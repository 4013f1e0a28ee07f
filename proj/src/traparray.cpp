#include "sgq/traparray.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "sgq/cesium.hpp"
#include "sgq/constants.hpp"

namespace sgq {

TrapConfig::TrapConfig() : polarizability_alpha(cesium().polarizability_780), atom_mass(cesium().mass) {}

void TrapConfig::validate() const {
    if (!(period_d > 0.0 && trap_waist_w0 > 0.0 && trap_wavelength > 0.0))
        throw std::invalid_argument("trap lengths must be positive");
    if (!(power_per_beam_P > 0.0)) throw std::invalid_argument("trap power must be positive");
    if (!(atom_mass > 0.0)) throw std::invalid_argument("atom mass must be positive");
    if (!std::isfinite(polarizability_alpha) || polarizability_alpha == 0.0)
        throw std::invalid_argument("polarizability must be finite and nonzero");
    if (!(s() > 1.0)) throw std::invalid_argument("trap needs s = d/w0 > 1 for confinement");
}

double TrapConfig::depth_scale() const {
    return polarizability_alpha / (2.0 * phys::eps0 * phys::c) * power_per_beam_P / (period_d * period_d);
}

SpringConstants spring_constants(const TrapConfig& cfg) {
    const double s = cfg.s();
    const double s2 = s * s;
    const double ud = std::abs(cfg.depth_scale());
    const double d = cfg.period_d;
    const double common = (s2 - 1.0) * std::exp(-s2);
    const double kx = 32.0 * ud / (phys::pi * d * d) * s2 * s2 * common;
    const double kz = 16.0 * cfg.trap_wavelength * cfg.trap_wavelength * ud /
                      (phys::pi * phys::pi * phys::pi * d * d * d * d) * s2 * s2 * s2 * common;
    return {kx, kx, kz};
}

TrapHarmonics trap_harmonics(const TrapConfig& cfg, double temperature) {
    if (!(cfg.s() * cfg.s() > 1.0)) throw std::domain_error("s^2 <= 1: the four-beam cell does not confine");
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    const auto k = spring_constants(cfg);
    const double m = cfg.atom_mass;
    const double kt = phys::kB * temperature;
    return {k.kappa_x,
            k.kappa_y,
            k.kappa_z,
            std::sqrt(k.kappa_x / m),
            std::sqrt(k.kappa_y / m),
            std::sqrt(k.kappa_z / m),
            std::sqrt(kt / k.kappa_x),
            std::sqrt(kt / k.kappa_y),
            std::sqrt(kt / k.kappa_z),
            temperature};
}

double trap_effective_detuning(double trap_wavelength) {
    const auto& cs = cesium();
    const double w = phys::two_pi * phys::c / trap_wavelength;
    const double d1 = w - phys::two_pi * phys::c / cs.d1_wavelength;
    const double d2 = w - phys::two_pi * phys::c / cs.d2_wavelength;
    return 1.0 / ((1.0 / 3.0) / d1 + (2.0 / 3.0) / d2);
}

TrapField::TrapField(const TrapConfig& cfg) : cfg_(cfg), k_(spring_constants(cfg)) {
    cfg_.validate();
    const double w0 = cfg_.trap_waist_w0;
    i0_ = 2.0 * cfg_.power_per_beam_P / (phys::pi * w0 * w0);
    zr_ = phys::pi * w0 * w0 / cfg_.trap_wavelength;
    u_per_i_ = -cfg_.polarizability_alpha / (2.0 * phys::eps0 * phys::c);
    stark_per_u_ = cesium().hyperfine_splitting / trap_effective_detuning(cfg_.trap_wavelength) / phys::hbar;
}

namespace {

constexpr std::array<std::array<double, 2>, 4> kCorners{{{0.5, 0.5}, {-0.5, 0.5}, {0.5, -0.5}, {-0.5, -0.5}}};

struct IntensityGradient {
    double value;
    Vec3 grad;
};

IntensityGradient four_beam(const Vec3& p, double d, double w0, double i0, double zr) {
    const double zeta = p.z / zr;
    const double ratio = 1.0 + zeta * zeta;
    const double w2 = w0 * w0 * ratio;
    const double dw2_dz = 2.0 * w0 * w0 * p.z / (zr * zr);
    IntensityGradient out{0.0, {}};
    for (const auto& c : kCorners) {
        const double dx = p.x - c[0] * d;
        const double dy = p.y - c[1] * d;
        const double rho2 = dx * dx + dy * dy;
        const double ib = i0 / ratio * std::exp(-2.0 * rho2 / w2);
        out.value += ib;
        out.grad.x += ib * (-4.0 * dx / w2);
        out.grad.y += ib * (-4.0 * dy / w2);
        out.grad.z += ib * (-dw2_dz / w2 + 2.0 * rho2 * dw2_dz / (w2 * w2));
    }
    return out;
}

}  // namespace

PotentialForce TrapField::operator()(const Vec3& p) const {
    if (cfg_.model == TrapModel::harmonic) {
        const double u = 0.5 * (k_.kappa_x * p.x * p.x + k_.kappa_y * p.y * p.y + k_.kappa_z * p.z * p.z);
        return {u, {-k_.kappa_x * p.x, -k_.kappa_y * p.y, -k_.kappa_z * p.z}};
    }
    const auto ig = four_beam(p, cfg_.period_d, cfg_.trap_waist_w0, i0_, zr_);
    return {u_per_i_ * ig.value, ig.grad * (-u_per_i_)};
}

Vec3 TrapField::force(const Vec3& p) const {
    if (cfg_.model == TrapModel::harmonic) return {-k_.kappa_x * p.x, -k_.kappa_y * p.y, -k_.kappa_z * p.z};
    return (*this)(p).force;
}

double TrapField::stark_shift(const Vec3& p) const { return stark_per_u_ * (*this)(p).potential; }

double unit_cell_intensity(const Vec3& point, const TrapConfig& cfg) {
    cfg.validate();
    const double w0 = cfg.trap_waist_w0;
    return four_beam(point, cfg.period_d, w0, 2.0 * cfg.power_per_beam_P / (phys::pi * w0 * w0),
                     phys::pi * w0 * w0 / cfg.trap_wavelength)
        .value;
}

PotentialForce trap_potential_and_force(const Vec3& point, const TrapConfig& cfg) { return TrapField(cfg)(point); }

double trap_stark_shift(const Vec3& point, const TrapConfig& cfg) { return TrapField(cfg).stark_shift(point); }

}  // namespace sgq
