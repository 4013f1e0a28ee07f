#include "sgq/beamoptics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>

#include "sgq/constants.hpp"
#include "sgq/parallel.hpp"

namespace sgq {

void BeamSpec::validate() const {
    if (!(order_n >= 2.0) || !std::isfinite(order_n))
        throw std::invalid_argument(fmt::format("beam order must be >= 2 (got {})", order_n));
    if (!(waist_w > 0.0) || !std::isfinite(waist_w)) throw std::invalid_argument("beam waist must be positive");
    if (!(wavelength > 0.0) || !std::isfinite(wavelength))
        throw std::invalid_argument("beam wavelength must be positive");
    if (!(peak_intensity_I0 >= 0.0)) throw std::invalid_argument("peak intensity must be non-negative");
    if (!std::isfinite(offset_x) || !std::isfinite(offset_y) || !std::isfinite(offset_z_waist))
        throw std::invalid_argument("beam offsets must be finite");
}

BeamSpec BeamSpec::aligned() const {
    BeamSpec b = *this;
    b.offset_x = b.offset_y = b.offset_z_waist = 0.0;
    return b;
}

QuadratureSpec QuadratureSpec::for_beam(const BeamSpec& beam, double amplitude_floor, double spacing_fraction) {
    beam.validate();
    if (!(amplitude_floor > 0.0 && amplitude_floor < 1.0))
        throw std::invalid_argument("amplitude floor must lie in (0, 1)");
    QuadratureSpec q;
    q.input_radius_cutoff = beam.waist_w * std::pow(std::log(1.0 / amplitude_floor), 1.0 / beam.order_n);
    q.input_sample_spacing = spacing_fraction * beam.wavelength;
    q.validate(beam);
    return q;
}

void QuadratureSpec::validate(const BeamSpec& beam) const {
    if (!(input_sample_spacing > 0.0)) throw std::invalid_argument("quadrature spacing must be positive");
    if (input_sample_spacing > 0.25 * beam.wavelength * (1.0 + 1e-12))
        throw std::invalid_argument(fmt::format("quadrature spacing {:.4g} m exceeds wavelength/4",
                                                input_sample_spacing));
    if (!(input_radius_cutoff > 0.0)) throw std::invalid_argument("quadrature cutoff must be positive");
    if (boundary_amplitude(input_radius_cutoff, beam) > 1e-8 * (1.0 + 1e-9))
        throw std::invalid_argument("quadrature cutoff leaves boundary amplitude above 1e-8");
    if (max_refinement < 1) throw std::invalid_argument("max_refinement must be >= 1");
}

int QuadratureSpec::refinement_at(double z) const {
    const double need = std::ceil(input_sample_spacing / (0.4 * z));
    return static_cast<int>(std::clamp(need, 1.0, static_cast<double>(max_refinement)));
}

double gaussian_intensity(const Vec3& point, const BeamSpec& beam) {
    beam.validate();
    if (beam.order_n != 2.0)
        throw std::invalid_argument("analytic Gaussian intensity requires order_n = 2");
    const double x = point.x - beam.offset_x;
    const double y = point.y - beam.offset_y;
    const double z = point.z - beam.offset_z_waist;
    const double z0 = phys::pi * beam.waist_w * beam.waist_w / beam.wavelength;
    const double ratio = 1.0 + (z / z0) * (z / z0);
    const double w2 = beam.waist_w * beam.waist_w * ratio;
    return std::exp(-2.0 * (x * x + y * y) / w2) / ratio;
}

double boundary_amplitude(double r, const BeamSpec& beam) {
    if (!(r >= 0.0)) throw std::invalid_argument("radius must be non-negative");
    return std::exp(-std::pow(r / beam.waist_w, beam.order_n));
}

namespace {

// Half-plane (y0 >= 0) source nodes with symmetry weights folded into amp.
struct SourceGrid {
    std::vector<double> x0;
    std::vector<double> y0sq;
    std::vector<double> amp;

    SourceGrid(const BeamSpec& beam, const QuadratureSpec& quad, int refinement) {
        const double h = quad.input_sample_spacing / refinement;
        const double rc = quad.input_radius_cutoff;
        const auto n = static_cast<long>(std::floor(rc / h));
        for (long j = 0; j <= n; ++j) {
            const double y = static_cast<double>(j) * h;
            const double weight = (j == 0 ? 1.0 : 2.0) * h * h;
            for (long i = -n; i <= n; ++i) {
                const double x = static_cast<double>(i) * h;
                const double r = std::sqrt(x * x + y * y);
                if (r > rc) continue;
                x0.push_back(x);
                y0sq.push_back(y * y);
                amp.push_back(weight * boundary_amplitude(r, beam));
            }
        }
    }

    // Field at (r, 0, z); cylindrical symmetry maps any (x, y, z) to this point.
    std::complex<double> field(double r, double z, double k, double wavelength) const {
        double re = 0.0, im = 0.0;
        const double z2 = z * z;
        const std::size_t n = x0.size();
        for (std::size_t s = 0; s < n; ++s) {
            const double dx = r - x0[s];
            const double rho2 = dx * dx + y0sq[s] + z2;
            const double rho = std::sqrt(rho2);
            const double kr = k * rho;
            const double a = 1.0 / kr;
            const double c = std::cos(kr), sn = std::sin(kr);
            const double scale = amp[s] / rho2;
            re += scale * (c - a * sn);
            im += scale * (sn + a * c);
        }
        // Prefactor k z / (i 2 pi) = -i z / lambda.
        const double pre = z / wavelength;
        return {pre * im, -pre * re};
    }
};

}  // namespace

std::complex<double> rs_field_at(const Vec3& point, const BeamSpec& beam, const QuadratureSpec& quad) {
    beam.validate();
    quad.validate(beam);
    if (!(point.z > 0.0))
        throw std::invalid_argument("Rayleigh-Sommerfeld evaluation requires z > 0; use the boundary or mirror rule");
    const SourceGrid grid(beam, quad, quad.refinement_at(point.z));
    const double k = phys::two_pi / beam.wavelength;
    return grid.field(std::hypot(point.x, point.y), point.z, k, beam.wavelength);
}

std::vector<double> GridSpec::r_grid() const {
    validate();
    const auto n = static_cast<std::size_t>(std::llround(r_max / dr));
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g[i] = static_cast<double>(i) * dr;
    return g;
}

std::vector<double> GridSpec::z_grid() const {
    validate();
    const auto n = static_cast<std::size_t>(std::llround(z_max / dz));
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g[i] = static_cast<double>(i) * dz;
    return g;
}

void GridSpec::validate() const {
    if (!(r_max > 0.0 && dr > 0.0 && z_max >= 0.0 && dz > 0.0))
        throw std::invalid_argument("grid extents and pitches must be positive");
    if (r_max / dr > 1e6 || z_max / dz > 1e6) throw std::invalid_argument("grid too fine");
}

IntensityMap build_intensity_map(const BeamSpec& beam_in, std::span<const double> r_grid,
                                 std::span<const double> z_grid, const QuadratureSpec& quad,
                                 unsigned threads) {
    const BeamSpec beam = beam_in.aligned();
    beam.validate();
    quad.validate(beam);
    if (r_grid.empty() || z_grid.empty()) throw std::invalid_argument("map grids must be non-empty");
    if (r_grid.front() < 0.0 || z_grid.front() < 0.0) throw std::invalid_argument("map grids must be non-negative");
    auto monotone = [](std::span<const double> g) {
        return std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) == g.end();
    };
    if (!monotone(r_grid) || !monotone(z_grid)) throw std::invalid_argument("map grids must be strictly increasing");

    // One source grid per distinct refinement level.
    std::map<int, SourceGrid> sources;
    for (double z : z_grid)
        if (z > 0.0) {
            const int m = quad.refinement_at(z);
            if (!sources.contains(m)) sources.emplace(m, SourceGrid(beam, quad, m));
        }

    const std::size_t nr = r_grid.size(), nz = z_grid.size();
    std::vector<double> values(nr * nz);
    const double k = phys::two_pi / beam.wavelength;
    parallel_for(nr * nz, threads, [&](std::size_t idx) {
        const std::size_t iz = idx / nr, ir = idx % nr;
        const double r = r_grid[ir], z = z_grid[iz];
        if (z == 0.0) {
            const double a = boundary_amplitude(r, beam);
            values[idx] = a * a;
        } else {
            values[idx] = std::norm(sources.at(quad.refinement_at(z)).field(r, z, k, beam.wavelength));
        }
    });
    return IntensityMap({r_grid.begin(), r_grid.end()}, {z_grid.begin(), z_grid.end()}, std::move(values), beam,
                        quad);
}

double intensity_at(const IntensityMap& map, const Vec3& point, const BeamSpec& offsets) {
    const double x = point.x - offsets.offset_x;
    const double y = point.y - offsets.offset_y;
    const double z = point.z - offsets.offset_z_waist;
    return map.at(std::hypot(x, y), z);
}

AddressingBeam::AddressingBeam(const BeamSpec& gaussian) : spec_(gaussian) {
    spec_.validate();
    if (spec_.order_n != 2.0)
        throw std::invalid_argument("super Gaussian addressing beams need a propagated intensity map");
}

AddressingBeam::AddressingBeam(const BeamSpec& spec, std::shared_ptr<const IntensityMap> map)
    : spec_(spec), map_(std::move(map)) {
    spec_.validate();
    if (!map_) throw std::invalid_argument("null intensity map");
    const BeamSpec& m = map_->beam();
    if (m.order_n != spec_.order_n || m.waist_w != spec_.waist_w || m.wavelength != spec_.wavelength)
        throw std::invalid_argument("intensity map was built for a different beam");
}

double AddressingBeam::intensity(const Vec3& point) const {
    return map_ ? intensity_at(*map_, point, spec_) : gaussian_intensity(point, spec_);
}

bool AddressingBeam::covers(const Vec3& point) const {
    if (!map_) return true;
    return map_->covers(std::hypot(point.x - spec_.offset_x, point.y - spec_.offset_y),
                        point.z - spec_.offset_z_waist);
}

AddressingBeam AddressingBeam::displaced(double offset_x, double offset_y, double offset_z_waist) const {
    AddressingBeam b = *this;
    b.spec_.offset_x = offset_x;
    b.spec_.offset_y = offset_y;
    b.spec_.offset_z_waist = offset_z_waist;
    return b;
}

double super_gaussian_width(double n, double w0_gauss, double d, double r0) {
    if (!(n > 2.0)) throw std::invalid_argument("width rule applies to super Gaussian orders n > 2");
    if (!(w0_gauss > 0.0 && d > 0.0)) throw std::invalid_argument("widths and spacing must be positive");
    if (!(r0 >= 0.0 && r0 < d)) throw std::invalid_argument("jitter must satisfy 0 <= r0 < d");
    return std::pow(w0_gauss / d, 2.0 / n) * (d - r0);
}

namespace {

double crosstalk_at(const AddressingBeam& beam, double d, ScanAxis axis, double offset) {
    const BeamSpec& s = beam.spec();
    const AddressingBeam moved = axis == ScanAxis::radial
                                     ? beam.displaced(s.offset_x + offset, s.offset_y, s.offset_z_waist)
                                     : beam.displaced(s.offset_x, s.offset_y, s.offset_z_waist + offset);
    return moved.intensity({d, 0.0, 0.0});
}

}  // namespace

std::vector<double> crosstalk_scan(const AddressingBeam& beam, double d, ScanAxis axis,
                                   std::span<const double> offsets) {
    std::vector<double> out;
    out.reserve(offsets.size());
    for (double o : offsets) out.push_back(crosstalk_at(beam, d, axis, o));
    return out;
}

double crosstalk_crossover(const AddressingBeam& a, const AddressingBeam& b, double d, ScanAxis axis,
                           double lo, double hi, int samples) {
    if (!(hi > lo) || samples < 2) throw std::invalid_argument("invalid crossover bracket");
    auto f = [&](double o) { return crosstalk_at(a, d, axis, o) - crosstalk_at(b, d, axis, o); };
    double x0 = lo, f0 = f(lo);
    for (int i = 1; i <= samples; ++i) {
        const double x1 = lo + (hi - lo) * i / samples;
        const double f1 = f(x1);
        if (f0 == 0.0) return x0;
        if ((f0 < 0.0) != (f1 < 0.0)) {
            double l = x0, h = x1, fl = f0;
            for (int it = 0; it < 200 && h - l > 1e-15; ++it) {
                const double m = 0.5 * (l + h);
                const double fm = f(m);
                if ((fm < 0.0) == (fl < 0.0)) {
                    l = m;
                    fl = fm;
                } else {
                    h = m;
                }
            }
            return 0.5 * (l + h);
        }
        x0 = x1;
        f0 = f1;
    }
    throw std::runtime_error("no crosstalk crossover in the scanned range");
}

}  // namespace sgq
