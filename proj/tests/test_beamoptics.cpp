#include <cmath>
#include <doctest.h>
#include <filesystem>
#include <random>

#include "sgq/beamoptics.hpp"
#include "sgq/constants.hpp"
#include "sgq/map_cache.hpp"

using namespace sgq;

namespace {

BeamSpec gaussian() { return BeamSpec{}; }

BeamSpec super(double n, double w) {
    BeamSpec b;
    b.order_n = n;
    b.waist_w = w;
    return b;
}

double rayleigh(const BeamSpec& b) { return phys::pi * b.waist_w * b.waist_w / b.wavelength; }

// Small grid shared by the map tests.
GridSpec small_grid() { return GridSpec{5e-6, 100e-9, 10e-6, 250e-9}; }

}  // namespace

TEST_SUITE("beamoptics") {

TEST_CASE("analytic Gaussian") {
    const BeamSpec b = gaussian();
    CHECK(gaussian_intensity({0, 0, rayleigh(b)}, b) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gaussian_intensity({b.waist_w, 0, 0}, b) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(gaussian_intensity({3.8e-6, 0, 0}, b) == doctest::Approx(0.0043).epsilon(0.02));
    CHECK_THROWS_AS(gaussian_intensity({0, 0, 0}, super(4, 2.84e-6)), std::invalid_argument);

    BeamSpec shifted = b;
    shifted.offset_x = 1e-6;
    shifted.offset_z_waist = 2e-6;
    CHECK(gaussian_intensity({1e-6, 0, 2e-6}, shifted) == doctest::Approx(1.0));
}

TEST_CASE("boundary amplitude flattens with order") {
    const BeamSpec b2 = gaussian(), b10 = super(10, 2.30e-6);
    CHECK(boundary_amplitude(0.0, b10) == 1.0);
    CHECK(boundary_amplitude(b10.waist_w, b10) == doctest::Approx(std::exp(-1.0)));
    CHECK(boundary_amplitude(0.5 * b2.waist_w, b10) == doctest::Approx(0.99902).epsilon(1e-5));
    CHECK(boundary_amplitude(0.5 * b2.waist_w, b2) == doctest::Approx(0.7788).epsilon(1e-4));
    for (double n : {2.0, 4.0, 6.0, 8.0}) {
        CHECK(boundary_amplitude(0.7e-6, super(n, 1e-6)) < boundary_amplitude(0.7e-6, super(n + 2, 1e-6)));
        CHECK(boundary_amplitude(1.3e-6, super(n, 1e-6)) > boundary_amplitude(1.3e-6, super(n + 2, 1e-6)));
    }
}

TEST_CASE("super-Gaussian width rule") {
    const double w0 = 2.30e-6, d = 3.8e-6, r0 = 150e-9;
    CHECK(super_gaussian_width(4, w0, d, r0) * 1e6 == doctest::Approx(2.84).epsilon(0.002));
    CHECK(super_gaussian_width(6, w0, d, r0) * 1e6 == doctest::Approx(3.09).epsilon(0.002));
    CHECK(super_gaussian_width(8, w0, d, r0) * 1e6 == doctest::Approx(3.22).epsilon(0.002));
    CHECK(super_gaussian_width(10, w0, d, r0) * 1e6 == doctest::Approx(3.30).epsilon(0.002));
    CHECK(super_gaussian_width(1e6, w0, d, 0.0) == doctest::Approx(d).epsilon(1e-5));
    CHECK_THROWS(super_gaussian_width(2, w0, d, r0));
    CHECK_THROWS(super_gaussian_width(4, w0, d, d));
}

TEST_CASE("quadrature spec invariants") {
    const BeamSpec b = super(6, 3.09e-6);
    const QuadratureSpec q = QuadratureSpec::for_beam(b);
    CHECK(q.input_sample_spacing <= b.wavelength / 4.0);
    CHECK(boundary_amplitude(q.input_radius_cutoff, b) <= 1e-8 * (1 + 1e-12));
    CHECK_NOTHROW(q.validate(b));
    QuadratureSpec coarse = q;
    coarse.input_sample_spacing = b.wavelength / 3.0;
    CHECK_THROWS(coarse.validate(b));
    QuadratureSpec short_disk = q;
    short_disk.input_radius_cutoff = b.waist_w;
    CHECK_THROWS(short_disk.validate(b));
    CHECK(q.refinement_at(10e-6) == 1);
    CHECK(q.refinement_at(1e-9) == q.max_refinement);
}

TEST_CASE("Rayleigh-Sommerfeld field of a Gaussian boundary") {
    const BeamSpec b = gaussian();
    const QuadratureSpec q = QuadratureSpec::for_beam(b);
    const double z0 = rayleigh(b);
    CHECK(std::norm(rs_field_at({0, 0, z0}, b, q)) == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(rs_field_at({0, 0, 20e-9}, b, q)) == doctest::Approx(1.0).epsilon(0.01));
    CHECK_THROWS(rs_field_at({0, 0, 0}, b, q));
    CHECK_THROWS(rs_field_at({0, 0, -1e-6}, b, q));
    // Rotational symmetry of the field about the axis.
    const auto a = rs_field_at({1e-6, 0, 3e-6}, b, q);
    const auto c = rs_field_at({0, 1e-6, 3e-6}, b, q);
    const auto e = rs_field_at({std::sqrt(0.5) * 1e-6, std::sqrt(0.5) * 1e-6, 3e-6}, b, q);
    CHECK(std::abs(a - c) < 1e-12);
    CHECK(std::abs(a - e) < 1e-12);
}

TEST_CASE("super-Gaussian on-axis focus beyond the waist") {
    // Coarse independent run: n = 6 at its design width peaks well above 1.
    const BeamSpec b = super(6, 3.09e-6);
    const QuadratureSpec q = QuadratureSpec::for_beam(b);
    double peak = 0.0;
    for (double z = 1e-6; z <= 100e-6; z += 1e-6) peak = std::max(peak, std::norm(rs_field_at({0, 0, z}, b, q)));
    CHECK(peak > 1.5);
}

TEST_CASE("Gaussian map against the analytic form") {
    const BeamSpec b = gaussian();
    const GridSpec g = small_grid();
    const auto map = build_intensity_map(b, g.r_grid(), g.z_grid(), QuadratureSpec::for_beam(b));
    CHECK(map.at(0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-3));
    double worst = 0.0;
    for (std::size_t iz = 0; iz < map.z_grid().size(); ++iz)
        for (std::size_t ir = 0; ir < map.r_grid().size(); ++ir) {
            const double exact = gaussian_intensity({map.r_grid()[ir], 0, map.z_grid()[iz]}, b);
            worst = std::max(worst, std::abs(map.node(ir, iz) - exact) / exact);
        }
    CHECK(worst < 0.02);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ur(0.0, 4e-6), uz(-9e-6, 9e-6);
    double max_abs = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Vec3 p{ur(rng), 0.0, uz(rng)};
        max_abs = std::max(max_abs, std::abs(intensity_at(map, p, b) - gaussian_intensity(p, b)));
    }
    CHECK(max_abs < 0.01);
}

TEST_CASE("map lookup rules") {
    const BeamSpec b = super(4, 2.84e-6);
    const GridSpec g{4e-6, 200e-9, 4e-6, 500e-9};
    const auto map = build_intensity_map(b, g.r_grid(), g.z_grid(), QuadratureSpec::for_beam(b));
    CHECK(map.at(map.r_grid()[3], map.z_grid()[2]) == map.node(3, 2));
    CHECK(map.at(1.1e-6, -2.3e-6) == map.at(1.1e-6, 2.3e-6));
    // The focal plane is exact.
    CHECK(map.at(1.23e-6, 0.0) == doctest::Approx(std::pow(boundary_amplitude(1.23e-6, b), 2)).epsilon(1e-14));
    CHECK_THROWS_AS(map.at(5e-6, 0.0), CoverageError);
    CHECK_THROWS_AS(map.at(0.0, -5e-6), CoverageError);
    for (double v : map.values()) CHECK(v >= 0.0);

    BeamSpec off = b;
    off.offset_x = 0.5e-6;
    off.offset_y = 0.2e-6;
    CHECK(intensity_at(map, {0.5e-6 + 1e-6, 0.2e-6, 1e-6}, off) == doctest::Approx(map.at(1e-6, 1e-6)));
}

TEST_CASE("quadrature refinement study") {
    const BeamSpec b = super(6, 3.09e-6);
    const std::vector<double> r{0.0, 1e-6, 2e-6, 3e-6, 3.8e-6};
    const std::vector<double> z{0.0, 0.5e-6, 2e-6, 6e-6};
    const auto base = build_intensity_map(b, r, z, QuadratureSpec::for_beam(b));
    const auto fine = build_intensity_map(b, r, z, QuadratureSpec::for_beam(b, 1e-8, 0.125));
    for (std::size_t i = 0; i < base.values().size(); ++i) {
        const double v = base.values()[i], f = fine.values()[i];
        // Relative where the value matters; absolute in the far tail.
        CHECK(std::abs(v - f) <= std::max(0.005 * f, 1e-6));
    }
}

TEST_CASE("transverse power is conserved") {
    const BeamSpec b = super(6, 3.09e-6);
    const GridSpec g{8e-6, 40e-9, 12e-6, 1e-6};
    const auto map = build_intensity_map(b, g.r_grid(), g.z_grid(), QuadratureSpec::for_beam(b));
    auto power = [&](std::size_t iz) {
        double s = 0.0;
        const auto& r = map.r_grid();
        for (std::size_t i = 1; i < r.size(); ++i)
            s += 0.5 * (map.node(i, iz) * r[i] + map.node(i - 1, iz) * r[i - 1]) * (r[i] - r[i - 1]);
        return s;
    };
    const double p0 = power(0);
    for (std::size_t iz = 1; iz < map.z_grid().size(); ++iz) CHECK(power(iz) == doctest::Approx(p0).epsilon(0.01));
}

TEST_CASE("map cache round trip is bit exact") {
    const BeamSpec b = super(8, 3.22e-6);
    const GridSpec g{2e-6, 250e-9, 3e-6, 750e-9};
    const QuadratureSpec q = QuadratureSpec::for_beam(b);
    const auto map = build_intensity_map(b, g.r_grid(), g.z_grid(), q);
    const auto dir = std::filesystem::temp_directory_path() / "sgq_test_map_cache";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto path = dir / "m.txt";
    map.save(path);
    const auto back = IntensityMap::load(path);
    CHECK(back.values() == map.values());
    CHECK(back.r_grid() == map.r_grid());
    CHECK(back.cache_key() == map.cache_key());
    CHECK(back.at(0.77e-6, 1.9e-6) == map.at(0.77e-6, 1.9e-6));

    MapCache disk(dir);
    const auto m1 = disk.get(b, g, q);
    CHECK(disk.builds() == 1);
    CHECK(disk.get(b, g, q) == m1);
    MapCache again(dir);
    const auto m2 = again.get(b, g, q);
    CHECK(again.disk_hits() == 1);
    CHECK(again.builds() == 0);
    CHECK(m2->values() == m1->values());
    std::filesystem::remove_all(dir);
}

TEST_CASE("crosstalk at the neighbor site") {
    const BeamSpec b = gaussian();
    const AddressingBeam beam(b);
    const double d = 3.8e-6;
    const auto aligned = crosstalk_scan(beam, d, ScanAxis::radial, std::vector<double>{0.0});
    CHECK(aligned[0] == doctest::Approx(gaussian_intensity({d, 0, 0}, b)));
    // Displacing toward the neighbor raises its intensity; an axial shift does too for a Gaussian.
    const auto rad = crosstalk_scan(beam, d, ScanAxis::radial, std::vector<double>{0.0, 0.2e-6, 0.4e-6});
    CHECK(rad[1] > rad[0]);
    CHECK(rad[2] > rad[1]);
    const auto ax = crosstalk_scan(beam, d, ScanAxis::axial, std::vector<double>{-2e-6, 2e-6});
    CHECK(ax[0] == doctest::Approx(ax[1]));
    CHECK(ax[0] > aligned[0]);

    // The flatter n = 4 beam leaks less until the offset grows; the roots are
    // where both neighbor intensities agree.
    const BeamSpec b4 = super(4, 2.84e-6);
    const GridSpec g{5e-6, 50e-9, 6e-6, 100e-9};
    const AddressingBeam flat(b4, std::make_shared<IntensityMap>(
                                      build_intensity_map(b4, g.r_grid(), g.z_grid(), QuadratureSpec::for_beam(b4))));
    for (ScanAxis axis : {ScanAxis::axial, ScanAxis::radial}) {
        const double hi = axis == ScanAxis::axial ? 6e-6 : 0.5e-6;
        const double x = crosstalk_crossover(flat, beam, d, axis, 0.0, hi);
        CHECK(x > 0.0);
        CHECK(x < hi);
        const double a = crosstalk_scan(flat, d, axis, std::vector<double>{x})[0];
        const double c = crosstalk_scan(beam, d, axis, std::vector<double>{x})[0];
        CHECK(a == doctest::Approx(c).epsilon(1e-6));
    }
    BeamSpec wide = b;
    wide.waist_w = 2.4e-6;
    // The wider Gaussian leaks more at every radial offset.
    CHECK_THROWS(crosstalk_crossover(AddressingBeam(wide), beam, d, ScanAxis::radial, 0.0, 0.5e-6));
}

TEST_CASE("addressing beam needs a map beyond order 2") {
    CHECK_THROWS(AddressingBeam(super(4, 2.84e-6)));
    const BeamSpec b = super(4, 2.84e-6);
    const GridSpec g{2e-6, 500e-9, 2e-6, 1e-6};
    auto map = std::make_shared<IntensityMap>(build_intensity_map(b, g.r_grid(), g.z_grid(), QuadratureSpec::for_beam(b)));
    CHECK_THROWS(AddressingBeam(super(6, 3.09e-6), map));
    const AddressingBeam beam(b, map);
    CHECK(beam.covers({1e-6, 1e-6, -1e-6}));
    CHECK_FALSE(beam.covers({2e-6, 1e-6, 0}));
    CHECK(beam.displaced(0.5e-6, 0, 0).intensity({0.5e-6, 0, 0}) == doctest::Approx(1.0));
}

}
