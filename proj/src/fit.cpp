#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <fmt/format.h>
#include <numbers>
#include <stdexcept>

#include "sgq/analysis.hpp"

namespace sgq {

double rabi_decay_model(const FitResult& p, double t) {
    const double s = std::sin(0.5 * p.omega_prime * t);
    return p.A * s * s * std::exp(-t / p.t_a) + p.B * (1.0 - std::exp(-t / p.t_b));
}

namespace {

// Internal parameters: A, B, W (rad/us), ln t_a, ln t_b (t in us).
using Params = Eigen::Matrix<double, 5, 1>;

constexpr double kUs = 1e-6;
constexpr double kLnMin = -6.9;   // 1 ns
constexpr double kLnMax = 27.6;   // ~1e12 us

constexpr std::array<double, 5> kLower{0.0, -1.0, 1e-9, kLnMin, kLnMin};
constexpr std::array<double, 5> kUpper{1.2, 1.0, 1e300, kLnMax, kLnMax};

Params project(Params p) {
    for (int d = 0; d < 5; ++d) p(d) = std::clamp(p(d), kLower[d], kUpper[d]);
    return p;
}

// Parameters sitting on a bound with the gradient pushing outward are held fixed.
std::array<bool, 5> active_bounds(const Params& p, const Params& g) {
    std::array<bool, 5> fixed{};
    for (int d = 0; d < 5; ++d)
        fixed[d] = (p(d) <= kLower[d] && g(d) > 0.0) || (p(d) >= kUpper[d] && g(d) < 0.0);
    return fixed;
}

struct Problem {
    Eigen::VectorXd t;
    Eigen::VectorXd y;

    Eigen::VectorXd residual(const Params& p) const {
        Eigen::VectorXd r(t.size());
        const double ta = std::exp(p(3)), tb = std::exp(p(4));
        for (Eigen::Index k = 0; k < t.size(); ++k) {
            const double s = std::sin(0.5 * p(2) * t(k));
            r(k) = p(0) * s * s * std::exp(-t(k) / ta) + p(1) * (1.0 - std::exp(-t(k) / tb)) - y(k);
        }
        return r;
    }

    Eigen::Matrix<double, Eigen::Dynamic, 5> jacobian(const Params& p) const {
        Eigen::Matrix<double, Eigen::Dynamic, 5> j(t.size(), 5);
        const double ta = std::exp(p(3)), tb = std::exp(p(4));
        for (Eigen::Index k = 0; k < t.size(); ++k) {
            const double tk = t(k);
            const double half = 0.5 * p(2) * tk;
            const double s = std::sin(half);
            const double ea = std::exp(-tk / ta), eb = std::exp(-tk / tb);
            j(k, 0) = s * s * ea;
            j(k, 1) = 1.0 - eb;
            j(k, 2) = p(0) * ea * 0.5 * tk * std::sin(2.0 * half);
            j(k, 3) = p(0) * s * s * ea * tk / ta;
            j(k, 4) = -p(1) * eb * tk / tb;
        }
        return j;
    }
};

// Frequency (rad per time unit) of the strongest periodogram peak of y - mean.
double dominant_frequency(const Eigen::VectorXd& t, const Eigen::VectorXd& y) {
    const double span = t(t.size() - 1) - t(0);
    const double mean = y.mean();
    std::vector<double> dts(static_cast<std::size_t>(t.size() - 1));
    for (Eigen::Index k = 1; k < t.size(); ++k) dts[static_cast<std::size_t>(k - 1)] = t(k) - t(k - 1);
    std::nth_element(dts.begin(), dts.begin() + static_cast<std::ptrdiff_t>(dts.size() / 2), dts.end());
    const double nyquist = std::numbers::pi / dts[dts.size() / 2];

    auto power = [&](double w) {
        std::complex<double> acc = 0.0;
        for (Eigen::Index k = 0; k < t.size(); ++k) acc += (y(k) - mean) * std::polar(1.0, -w * t(k));
        return std::norm(acc);
    };
    const double step = 2.0 * std::numbers::pi / (16.0 * span);
    double best_w = 0.0, best_p = -1.0;
    // Lowest candidate: a quarter cycle over the span.
    for (double w = 4.0 * step; w <= nyquist; w += step) {
        const double pw = power(w);
        if (pw > best_p) {
            best_p = pw;
            best_w = w;
        }
    }
    // Golden-section polish within one grid step.
    double lo = std::max(best_w - step, 1e-12), hi = best_w + step;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    double pa = power(a), pb = power(b);
    for (int i = 0; i < 60; ++i) {
        if (pa > pb) {
            hi = b; b = a; pb = pa;
            a = hi - g * (hi - lo); pa = power(a);
        } else {
            lo = a; a = b; pa = pb;
            b = lo + g * (hi - lo); pb = power(b);
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

FitResult fit_rabi_decay(std::span<const double> times, std::span<const double> populations) {
    if (times.size() != populations.size()) throw std::invalid_argument("times and populations differ in length");
    if (times.size() < 30) throw std::invalid_argument("Rabi fit needs at least 30 samples");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("fit times must be strictly increasing");

    Problem prob;
    const auto n = static_cast<Eigen::Index>(times.size());
    prob.t.resize(n);
    prob.y.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        prob.t(k) = times[static_cast<std::size_t>(k)] / kUs;
        prob.y(k) = populations[static_cast<std::size_t>(k)];
    }

    FitResult out;
    const double range = prob.y.maxCoeff() - prob.y.minCoeff();
    if (!(range > 1e-9)) {
        out.message = "no oscillation in the data; Omega' is unidentifiable";
        return out;
    }

    const double t0 = prob.t(0), span = prob.t(n - 1) - t0;
    const double w0 = dominant_frequency(prob.t, prob.y);
    const double period = 2.0 * std::numbers::pi / w0;
    if (span < 2.0 * period) {
        out.message = "data span fewer than two oscillation periods";
        return out;
    }

    // Per-period amplitude and mean for the envelope initialization.
    std::vector<double> centers, amps, means;
    for (double start = t0; start + period <= prob.t(n - 1) + 1e-12; start += period) {
        double mx = -1e300, mn = 1e300, sum = 0.0;
        int count = 0;
        for (Eigen::Index k = 0; k < n; ++k)
            if (prob.t(k) >= start && prob.t(k) < start + period) {
                mx = std::max(mx, prob.y(k));
                mn = std::min(mn, prob.y(k));
                sum += prob.y(k);
                ++count;
            }
        if (count < 2) continue;
        centers.push_back(start + 0.5 * period);
        amps.push_back(std::max(mx - mn, 1e-12));
        means.push_back(sum / count);
    }

    const double a0 = std::clamp(amps.front(), 0.0, 1.2);
    double ta0 = 1e3 * span;
    if (amps.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const auto m = static_cast<double>(amps.size());
        for (std::size_t i = 0; i < amps.size(); ++i) {
            const double ly = std::log(amps[i]);
            sx += centers[i]; sy += ly; sxx += centers[i] * centers[i]; sxy += centers[i] * ly;
        }
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        if (slope < 0.0) ta0 = std::min(-1.0 / slope, 1e3 * span);
    }
    const double tb0 = span;
    const double tl = centers.back();
    const double b0 = std::clamp((means.back() - 0.5 * a0 * std::exp(-tl / ta0)) / (1.0 - std::exp(-tl / tb0)),
                                 -1.0, 1.0);

    Params p;
    p << a0, b0, w0, std::log(ta0), std::log(tb0);
    p = project(p);

    Eigen::VectorXd r = prob.residual(p);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    bool converged = false;
    int it = 0;
    for (; it < 500; ++it) {
        const auto j = prob.jacobian(p);
        const Eigen::Matrix<double, 5, 5> jtj = j.transpose() * j;
        const Params g = j.transpose() * r;
        const auto fixed = active_bounds(p, g);
        bool accepted = false;
        while (!accepted) {
            Eigen::Matrix<double, 5, 5> a = jtj;
            for (int d = 0; d < 5; ++d) a(d, d) += lambda * std::max(jtj(d, d), 1e-12);
            Params rhs = -g;
            for (int d = 0; d < 5; ++d)
                if (fixed[d]) {
                    a.row(d).setZero();
                    a.col(d).setZero();
                    a(d, d) = 1.0;
                    rhs(d) = 0.0;
                }
            const Params step = a.ldlt().solve(rhs);
            const Params trial = project(p + step);
            const Eigen::VectorXd rt = prob.residual(trial);
            const double ct = rt.squaredNorm();
            if (std::isfinite(ct) && ct <= cost) {
                const double rel = (trial - p).norm() / (p.norm() + 1e-12);
                p = trial;
                r = rt;
                cost = ct;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (rel < 1e-8) converged = true;
            } else {
                lambda *= 4.0;
                if (lambda > 1e16) break;
            }
        }
        if (converged) break;
        if (!accepted) {
            // No descent direction left at working precision: a numerical minimum.
            converged = true;
            out.message = "stopped at a stationary point";
            break;
        }
    }

    out.A = p(0);
    out.B = p(1);
    out.omega_prime = p(2) / kUs;
    out.t_a = std::exp(p(3)) * kUs;
    out.t_b = std::exp(p(4)) * kUs;
    out.residual_norm = std::sqrt(cost);
    out.iterations = it + (converged ? 1 : 0);
    out.converged = converged && std::isfinite(cost);
    if (!out.converged && out.message.empty()) out.message = "iteration limit reached";
    if (out.converged && out.message.empty()) out.message = "relative step below 1e-8";
    return out;
}

}  // namespace sgq
