#include <cmath>
#include <doctest.h>
#include <numbers>

#include "sgq/analysis.hpp"
#include "sgq/beamoptics.hpp"

using namespace sgq;

namespace {

// Wavefunction widths s_j = sqrt2 sigma_j for the 20 uK thermal cloud.
const Vec3 kPsi20{std::sqrt(2.0) * 0.1792e-6, std::sqrt(2.0) * 0.1792e-6, std::sqrt(2.0) * 1.766e-6};

// Density variance of an aligned Gaussian in closed form: with a = 2 s^2 / w^2 and
// b = (z / z_R)^2 neglected, <I^k> = 1 / (1 + k a) in each transverse axis.
double gaussian_focal_sigma(double w, double s) {
    const double a = 2.0 * s * s / (w * w) * 0.5;   // |Psi|^2 variance s^2/2
    auto moment = [&](double k) { return 1.0 / (1.0 + 2.0 * k * a); };
    return std::sqrt(moment(2) - moment(1) * moment(1));
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("Gauss-Hermite and Gauss-Laguerre rules") {
    const auto gh = gauss_hermite(20);
    double m0 = 0, m2 = 0, m4 = 0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        const double x = gh.nodes[i], w = gh.weights[i];
        m0 += w;
        m2 += w * x * x;
        m4 += w * x * x * x * x;
    }
    const double sp = std::sqrt(std::numbers::pi);
    CHECK(m0 == doctest::Approx(sp).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(sp / 2).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(3 * sp / 4).epsilon(1e-13));
    const auto gl = gauss_laguerre(20);
    double l0 = 0, l3 = 0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        l0 += gl.weights[i];
        l3 += gl.weights[i] * std::pow(gl.nodes[i], 3);
        CHECK(gl.nodes[i] > 0.0);
    }
    CHECK(l0 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(l3 == doctest::Approx(6.0).epsilon(1e-12));
    CHECK_THROWS(gauss_hermite(0));
}

TEST_CASE("constant intensity has no variance") {
    BeamSpec flat;
    flat.waist_w = 1.0;   // metre-scale waist: I = 1 across the cloud
    const VarianceRequest req{AddressingBeam(flat), kPsi20};
    CHECK(intensity_variance(req) < 1e-10);
}

TEST_CASE("Gaussian variance against the focal-plane closed form") {
    // A long Rayleigh range isolates the transverse part.
    BeamSpec b;
    b.wavelength = 1e-12;
    const VarianceRequest req{AddressingBeam(b), kPsi20};
    CHECK(intensity_variance(req) == doctest::Approx(gaussian_focal_sigma(b.waist_w, kPsi20.x)).epsilon(1e-6));
}

TEST_CASE("variance properties on the analytic Gaussian") {
    const BeamSpec b;
    VarianceRequest req{AddressingBeam(b), kPsi20};
    const double base = intensity_variance(req);
    CHECK(base > 0.0);
    // The tensor rule (offset beam) and the radial reduction agree at tiny offset.
    VarianceRequest tiny = req;
    tiny.beam = req.beam.displaced(1e-15, 0, 0);
    CHECK(intensity_variance(tiny) == doctest::Approx(base).epsilon(1e-6));
    // Exchanging x and y offsets.
    VarianceRequest ox = req, oy = req;
    ox.beam = req.beam.displaced(0.4e-6, 0.1e-6, 0.5e-6);
    oy.beam = req.beam.displaced(0.1e-6, 0.4e-6, 0.5e-6);
    CHECK(intensity_variance(ox) == doctest::Approx(intensity_variance(oy)).epsilon(1e-10));
    // Doubling the order barely moves the answer.
    VarianceRequest high = ox;
    high.quadrature_order = 80;
    CHECK(intensity_variance(high) == doctest::Approx(intensity_variance(ox)).epsilon(0.01));

    const std::vector<double> offsets{0.0, 0.5e-6, 1.0e-6};
    const auto scan = variance_scan(req, ScanAxis::radial, offsets, 2);
    CHECK(scan[0] == doctest::Approx(base));
    CHECK(scan[1] > scan[0]);
    for (double v : scan) CHECK(v >= 0.0);
    const auto axial = variance_scan(req, ScanAxis::axial, std::vector<double>{-3e-6, 3e-6}, 1);
    CHECK(axial[0] == doctest::Approx(axial[1]).epsilon(1e-10));

    VarianceRequest bad = req;
    bad.psi_widths.z = 0.0;
    CHECK_THROWS(intensity_variance(bad));
}

TEST_CASE("variance needs map coverage") {
    BeamSpec b;
    b.order_n = 6;
    b.waist_w = 3.09e-6;
    const GridSpec g{1e-6, 100e-9, 2e-6, 500e-9};
    auto map = std::make_shared<IntensityMap>(build_intensity_map(b, g.r_grid(), g.z_grid(), QuadratureSpec::for_beam(b)));
    const VarianceRequest req{AddressingBeam(b, map), kPsi20};
    CHECK_THROWS_AS(intensity_variance(req), CoverageError);
}

TEST_CASE("modified Thompson tau") {
    CHECK(thompson_tau(10) == doctest::Approx(1.7984).epsilon(1e-3));
    CHECK_THROWS(thompson_tau(2));

    const std::vector<double> spike{1, 1, 1, 1, 1, 1, 1, 1, 1, 10};
    const auto r = thompson_tau_filter(spike);
    REQUIRE(r.removed.size() == 1);
    CHECK(r.removed[0] == 9);
    CHECK(r.retained.size() == 9);

    const std::vector<double> tight{1.0, 1.1, 0.9};
    CHECK(thompson_tau_filter(tight).removed.empty());

    const std::vector<double> spread{3.1, 2.9, 3.0, 3.2, 2.8, 7.5, 3.05, -1.0, 3.0, 2.95, 3.1, 12.0};
    const auto f = thompson_tau_filter(spread);
    std::vector<double> kept;
    for (auto i : f.retained) kept.push_back(spread[i]);
    CHECK(thompson_tau_filter(kept).removed.empty());
    CHECK(f.removed.size() <= (spread.size() + 2) / 3);
    const auto [lo, hi] = std::minmax_element(kept.begin(), kept.end());
    for (auto i : f.removed) CHECK((spread[i] < *lo || spread[i] > *hi));

    // Wild data never lose more than a third of the points.
    const std::vector<double> wild{1, 1e3, -1e3, 1e6, -1e6, 1e9, 2, 3, 4};
    CHECK(thompson_tau_filter(wild).removed.size() <= 3);
    CHECK_THROWS(thompson_tau_filter(std::vector<double>{1.0, 2.0}));
}

}
