#include "sgq/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <stdexcept>

#include "sgq/parallel.hpp"

namespace sgq {
namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights mu0 * v0^2.
QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double mu0) {
    const auto n = diag.size();
    Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        jm(i, i) = diag(i);
        if (i + 1 < n) jm(i, i + 1) = jm(i + 1, i) = off(i);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jm);
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace

QuadratureRule gauss_hermite(int order) {
    if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd off(std::max(order - 1, 0));
    for (int i = 1; i < order; ++i) off(i - 1) = std::sqrt(0.5 * i);
    return golub_welsch(diag, off, std::sqrt(std::numbers::pi));
}

QuadratureRule gauss_laguerre(int order) {
    if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
    Eigen::VectorXd diag(order);
    Eigen::VectorXd off(std::max(order - 1, 0));
    for (int i = 0; i < order; ++i) diag(i) = 2.0 * i + 1.0;
    for (int i = 1; i < order; ++i) off(i - 1) = i;
    return golub_welsch(diag, off, 1.0);
}

namespace {

struct Sample {
    Vec3 p;
    double w;
};

std::vector<Sample> density_nodes(const VarianceRequest& req) {
    const Vec3 s = req.psi_widths;
    const BeamSpec& b = req.beam.spec();
    const int n = req.quadrature_order;
    std::vector<Sample> out;
    const auto gh = gauss_hermite(n);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    if (b.offset_x == 0.0 && b.offset_y == 0.0 && s.x == s.y) {
        // Radial symmetry: r^2 / s^2 is Exp(1) distributed under |Psi|^2.
        const auto gl = gauss_laguerre(n);
        for (std::size_t i = 0; i < gl.nodes.size(); ++i)
            for (std::size_t k = 0; k < gh.nodes.size(); ++k)
                out.push_back({{s.x * std::sqrt(gl.nodes[i]), 0.0, s.z * gh.nodes[k]},
                               gl.weights[i] * gh.weights[k] * inv_sqrt_pi});
        return out;
    }
    const double norm3 = inv_sqrt_pi * inv_sqrt_pi * inv_sqrt_pi;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i)
        for (std::size_t j = 0; j < gh.nodes.size(); ++j)
            for (std::size_t k = 0; k < gh.nodes.size(); ++k)
                out.push_back({{s.x * gh.nodes[i], s.y * gh.nodes[j], s.z * gh.nodes[k]},
                               gh.weights[i] * gh.weights[j] * gh.weights[k] * norm3});
    return out;
}

void require_coverage(const VarianceRequest& req) {
    const auto& map = req.beam.map();
    if (!map) return;
    const BeamSpec& b = req.beam.spec();
    // Density standard deviation is s / sqrt(2) per axis.
    const double k = 5.0 / std::numbers::sqrt2;
    const double r_far = std::hypot(std::abs(b.offset_x) + k * req.psi_widths.x,
                                    std::abs(b.offset_y) + k * req.psi_widths.y);
    const double z_far = std::abs(b.offset_z_waist) + k * req.psi_widths.z;
    if (!map->covers(r_far, z_far))
        throw CoverageError(fmt::format("intensity map does not cover +-5 sigma of the atom density "
                                        "(needs r <= {:.3g} um, |z| <= {:.3g} um)",
                                        r_far * 1e6, z_far * 1e6));
}

}  // namespace

double intensity_variance(const VarianceRequest& req) {
    if (!(req.psi_widths.x > 0.0 && req.psi_widths.y > 0.0 && req.psi_widths.z > 0.0))
        throw std::invalid_argument("wavefunction widths must be positive");
    if (req.quadrature_order < 2) throw std::invalid_argument("quadrature order must be >= 2");
    require_coverage(req);

    // Nodes past the map edge lie beyond 5 sigma; their weight is dropped.
    const auto nodes = density_nodes(req);
    std::vector<double> values(nodes.size());
    std::vector<double> weights(nodes.size());
    double wsum = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!req.beam.covers(nodes[i].p)) continue;
        values[i] = req.beam.intensity(nodes[i].p);
        weights[i] = nodes[i].w;
        wsum += nodes[i].w;
        mean += nodes[i].w * values[i];
    }
    mean /= wsum;
    double var = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double d = values[i] - mean;
        var += weights[i] * d * d;
    }
    return std::sqrt(std::max(0.0, var / wsum));
}

std::vector<double> variance_scan(const VarianceRequest& req, ScanAxis axis, std::span<const double> offsets,
                                  unsigned threads) {
    std::vector<double> out(offsets.size());
    const BeamSpec& b = req.beam.spec();
    parallel_for(offsets.size(), threads, [&](std::size_t i) {
        VarianceRequest r = req;
        r.beam = axis == ScanAxis::radial ? req.beam.displaced(offsets[i], b.offset_y, b.offset_z_waist)
                                          : req.beam.displaced(b.offset_x, b.offset_y, offsets[i]);
        out[i] = intensity_variance(r);
    });
    return out;
}

double thompson_tau(std::size_t n, double alpha) {
    if (n < 3) throw std::invalid_argument("modified Thompson tau needs n >= 3");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    const boost::math::students_t dist(static_cast<double>(n - 2));
    const double t = boost::math::quantile(dist, 1.0 - alpha / 2.0);
    const auto nd = static_cast<double>(n);
    return t * (nd - 1.0) / (std::sqrt(nd) * std::sqrt(nd - 2.0 + t * t));
}

ThompsonResult thompson_tau_filter(std::span<const double> values, double alpha) {
    const std::size_t n = values.size();
    if (n < 3) throw std::invalid_argument("modified Thompson tau needs at least 3 values");
    const std::size_t max_removed = (n + 2) / 3;

    std::vector<std::size_t> keep(n);
    for (std::size_t i = 0; i < n; ++i) keep[i] = i;
    ThompsonResult res;
    while (keep.size() >= 3 && res.removed.size() < max_removed) {
        const auto m = static_cast<double>(keep.size());
        double mean = 0.0;
        for (auto i : keep) mean += values[i];
        mean /= m;
        double ss = 0.0;
        for (auto i : keep) ss += (values[i] - mean) * (values[i] - mean);
        const double sd = std::sqrt(ss / (m - 1.0));

        auto worst = keep.begin();
        for (auto it = keep.begin(); it != keep.end(); ++it)
            if (std::abs(values[*it] - mean) > std::abs(values[*worst] - mean)) worst = it;
        if (!(std::abs(values[*worst] - mean) > thompson_tau(keep.size(), alpha) * sd)) break;
        res.removed.push_back(*worst);
        keep.erase(worst);
    }
    res.retained = std::move(keep);
    return res;
}

}  // namespace sgq
