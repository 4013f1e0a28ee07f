#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sgq/beamoptics.hpp"
#include "sgq/vec3.hpp"

namespace sgq {

// Atom wavefunction Psi ~ exp(-x^2/(2 sx^2) - y^2/(2 sy^2) - z^2/(2 sz^2)), so the
// position density |Psi|^2 has per-axis variance s^2/2. psi_widths are the s_j.
struct VarianceRequest {
    AddressingBeam beam;     // offsets live in beam.spec()
    Vec3 psi_widths;         // m
    int quadrature_order = 40;
};

// sqrt(<I^2> - <I>^2) over |Psi|^2 by Gauss-Hermite tensor quadrature. The
// aligned, radially symmetric case reduces to Gauss-Laguerre in r^2 times
// Gauss-Hermite in z. Throws CoverageError unless the beam's map covers +-5
// density standard deviations around the trap center.
double intensity_variance(const VarianceRequest& req);

// Same request with the beam displaced by each offset along x or z.
std::vector<double> variance_scan(const VarianceRequest& req, ScanAxis axis, std::span<const double> offsets,
                                  unsigned threads = 0);

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Physicists' Hermite rule for weight e^{-x^2} on the real line.
QuadratureRule gauss_hermite(int order);
// Gauss-Laguerre rule for weight e^{-x} on [0, inf).
QuadratureRule gauss_laguerre(int order);

struct FitResult {
    double A = 0.0;
    double B = 0.0;
    double omega_prime = 0.0;  // rad/s
    double t_a = 0.0;          // s
    double t_b = 0.0;          // s
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

// Model A sin^2(W t / 2) e^{-t/t_a} + B (1 - e^{-t/t_b}).
double rabi_decay_model(const FitResult& p, double t);

// Levenberg-Marquardt fit of the model above. Stops when the relative step
// falls below 1e-8 or after 500 iterations.
FitResult fit_rabi_decay(std::span<const double> times, std::span<const double> populations);

struct ThompsonResult {
    std::vector<std::size_t> retained;  // indices into the input, ascending
    std::vector<std::size_t> removed;   // in removal order
};

// tau = t (n - 1) / (sqrt(n) sqrt(n - 2 + t^2)), t the two-sided Student-t
// critical value at alpha with n - 2 degrees of freedom.
double thompson_tau(std::size_t n, double alpha = 0.05);

// Iteratively drops the point farthest from the mean while its deviation
// exceeds tau * s. Stops once fewer than 3 points remain and never removes
// more than ceil(n/3) points.
ThompsonResult thompson_tau_filter(std::span<const double> values, double alpha = 0.05);

}  // namespace sgq
