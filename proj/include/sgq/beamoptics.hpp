#pragma once

#include <complex>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgq/vec3.hpp"

namespace sgq {

// Addressing beam propagating along +z with its waist (planar phase front) at
// z = offset_z_waist in the trap frame. Offsets displace the beam axis.
struct BeamSpec {
    double order_n = 2.0;
    double waist_w = 2.30e-6;          // m
    double wavelength = 459e-9;        // m
    double peak_intensity_I0 = 0.0;    // W/m^2, informational for normalized maps
    double offset_x = 0.0;             // m
    double offset_y = 0.0;             // m
    double offset_z_waist = 0.0;       // m

    void validate() const;
    BeamSpec aligned() const;          // same beam with all offsets cleared
};

// Square rectangle rule clipped to the disk r <= input_radius_cutoff.
// Field points closer to the source plane than spacing / 0.4 use a grid refined
// by an integer factor (at most max_refinement) so that the aliasing error of
// the rectangle rule, which decays like exp(-2 pi z / h), stays below 1e-6.
struct QuadratureSpec {
    double input_radius_cutoff = 0.0;  // m
    double input_sample_spacing = 0.0; // m
    int max_refinement = 16;

    static QuadratureSpec for_beam(const BeamSpec& beam, double amplitude_floor = 1e-8,
                                   double spacing_fraction = 0.25);
    void validate(const BeamSpec& beam) const;
    int refinement_at(double z) const;
};

class CoverageError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Gaussian beam intensity normalized to 1 at the waist center. The
// point is in the trap frame; beam offsets are applied. Rejects order_n != 2.
double gaussian_intensity(const Vec3& point, const BeamSpec& beam);

// e^{-(r/w)^n}: the real focal-plane field.
double boundary_amplitude(double r, const BeamSpec& beam);

// Scalar Rayleigh-Sommerfeld field of the boundary e^{-(r/w)^n} at a point in
// the beam frame (waist plane at z = 0), in units of the boundary amplitude.
std::complex<double> rs_field_at(const Vec3& point, const BeamSpec& beam, const QuadratureSpec& quad);

struct GridSpec {
    double r_max = 8e-6;
    double dr = 40e-9;
    double z_max = 12e-6;
    double dz = 100e-9;

    std::vector<double> r_grid() const;
    std::vector<double> z_grid() const;
    void validate() const;
};

// Normalized intensity |E|^2 on an (r, z >= 0) grid in the beam frame, row-major
// in z. The z = 0 row is the boundary intensity itself, so focal-plane queries
// evaluate e^{-2(r/w)^n} exactly; elsewhere queries are bilinear.
class IntensityMap {
public:
    IntensityMap(std::vector<double> r_grid, std::vector<double> z_grid, std::vector<double> values,
                 BeamSpec beam, QuadratureSpec quad);

    const std::vector<double>& r_grid() const { return r_; }
    const std::vector<double>& z_grid() const { return z_; }
    const std::vector<double>& values() const { return values_; }
    const BeamSpec& beam() const { return beam_; }
    const QuadratureSpec& quadrature() const { return quad_; }

    double node(std::size_t ir, std::size_t iz) const { return values_[iz * r_.size() + ir]; }
    bool covers(double r, double z) const;
    // Beam-frame lookup; negative z is mirrored. Throws CoverageError outside the grid.
    double at(double r, double z) const;

    std::string cache_key() const;
    void save(const std::filesystem::path& path) const;
    static IntensityMap load(const std::filesystem::path& path);

private:
    std::vector<double> r_;
    std::vector<double> z_;
    std::vector<double> values_;
    BeamSpec beam_;
    QuadratureSpec quad_;
};

// Hash of everything that determines a map's contents.
std::string intensity_map_key(const BeamSpec& beam, const QuadratureSpec& quad,
                              std::span<const double> r_grid, std::span<const double> z_grid);

IntensityMap build_intensity_map(const BeamSpec& beam, std::span<const double> r_grid,
                                 std::span<const double> z_grid, const QuadratureSpec& quad,
                                 unsigned threads = 0);

// Trap-frame lookup: shifts by the beam offsets, then applies the mirror rule.
double intensity_at(const IntensityMap& map, const Vec3& point, const BeamSpec& offsets);

// Normalized addressing-beam intensity at trap-frame positions. Order 2 uses
// the analytic Gaussian unless a map is supplied; other orders need a map.
class AddressingBeam {
public:
    explicit AddressingBeam(const BeamSpec& gaussian);
    AddressingBeam(const BeamSpec& spec, std::shared_ptr<const IntensityMap> map);

    double intensity(const Vec3& point) const;
    bool covers(const Vec3& point) const;
    bool analytic() const { return !map_; }
    const BeamSpec& spec() const { return spec_; }
    const std::shared_ptr<const IntensityMap>& map() const { return map_; }
    AddressingBeam displaced(double offset_x, double offset_y, double offset_z_waist) const;

private:
    BeamSpec spec_;
    std::shared_ptr<const IntensityMap> map_;
};

// Width that keeps the focal-plane crosstalk at distance d - r0 equal to that
// of the aligned Gaussian: (w0/d)^{2/n} (d - r0).
double super_gaussian_width(double n, double w0_gauss, double d, double r0);

enum class ScanAxis { radial, axial };

// Intensity at the neighboring site (d, 0, 0) while the beam is displaced by
// each offset: along +x toward the neighbor (radial) or along z (axial).
std::vector<double> crosstalk_scan(const AddressingBeam& beam, double d, ScanAxis axis,
                                   std::span<const double> offsets);

// First offset in [lo, hi] where the crosstalk of `a` equals that of `b`, with
// both beams displaced by the same amount. Throws if no crossing is bracketed.
double crosstalk_crossover(const AddressingBeam& a, const AddressingBeam& b, double d, ScanAxis axis,
                           double lo, double hi, int samples = 400);

}  // namespace sgq
