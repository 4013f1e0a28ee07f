#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "sgq/beamoptics.hpp"

namespace sgq {
namespace {

constexpr const char* kMagic = "sgq-intensity-map 1";

std::string canonical_header(const BeamSpec& beam, const QuadratureSpec& quad, std::size_t nr, std::size_t nz) {
    return fmt::format("order_n {:.17g}\nwaist_w {:.17g}\nwavelength {:.17g}\ncutoff {:.17g}\nspacing {:.17g}\n"
                       "max_refinement {}\nnr {}\nnz {}\n",
                       beam.order_n, beam.waist_w, beam.wavelength, quad.input_radius_cutoff,
                       quad.input_sample_spacing, quad.max_refinement, nr, nz);
}

struct Fnv1a {
    std::uint64_t h = 1469598103934665603ull;
    void add(std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    }
};

// Index i with g[i] <= x <= g[i+1]; g has at least two entries and x is in range.
std::size_t cell(const std::vector<double>& g, double x) {
    auto it = std::upper_bound(g.begin(), g.end(), x);
    std::size_t i = (it == g.begin()) ? 0 : static_cast<std::size_t>(it - g.begin()) - 1;
    return std::min(i, g.size() - 2);
}

}  // namespace

IntensityMap::IntensityMap(std::vector<double> r_grid, std::vector<double> z_grid, std::vector<double> values,
                           BeamSpec beam, QuadratureSpec quad)
    : r_(std::move(r_grid)), z_(std::move(z_grid)), values_(std::move(values)), beam_(beam.aligned()), quad_(quad) {
    beam_.validate();
    if (r_.size() < 2 || z_.size() < 2) throw std::invalid_argument("intensity map needs at least 2x2 nodes");
    if (values_.size() != r_.size() * z_.size()) throw std::invalid_argument("intensity map value count mismatch");
    if (r_.front() < 0.0 || z_.front() < 0.0) throw std::invalid_argument("intensity map grids must be non-negative");
    for (double v : values_)
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("intensity map values must be finite and >= 0");
}

bool IntensityMap::covers(double r, double z) const {
    const double az = std::abs(z);
    return r >= r_.front() && r <= r_.back() && az >= z_.front() && az <= z_.back();
}

double IntensityMap::at(double r, double z) const {
    const double az = std::abs(z);
    if (!covers(r, az))
        throw CoverageError(fmt::format("intensity map query (r={:.4g} um, z={:.4g} um) outside coverage "
                                        "r<={:.4g} um, |z|<={:.4g} um",
                                        r * 1e6, z * 1e6, r_.back() * 1e6, z_.back() * 1e6));
    if (az == 0.0) return std::exp(-2.0 * std::pow(r / beam_.waist_w, beam_.order_n));
    const std::size_t ir = cell(r_, r), iz = cell(z_, az);
    const double tr = (r - r_[ir]) / (r_[ir + 1] - r_[ir]);
    const double tz = (az - z_[iz]) / (z_[iz + 1] - z_[iz]);
    const double v00 = node(ir, iz), v10 = node(ir + 1, iz);
    const double v01 = node(ir, iz + 1), v11 = node(ir + 1, iz + 1);
    return (1.0 - tz) * ((1.0 - tr) * v00 + tr * v10) + tz * ((1.0 - tr) * v01 + tr * v11);
}

std::string intensity_map_key(const BeamSpec& beam, const QuadratureSpec& quad, std::span<const double> r_grid,
                              std::span<const double> z_grid) {
    Fnv1a f;
    f.add(canonical_header(beam, quad, r_grid.size(), z_grid.size()));
    for (double r : r_grid) f.add(fmt::format("{:.17g},", r));
    f.add(";");
    for (double z : z_grid) f.add(fmt::format("{:.17g},", z));
    return fmt::format("{:016x}", f.h);
}

std::string IntensityMap::cache_key() const { return intensity_map_key(beam_, quad_, r_, z_); }

void IntensityMap::save(const std::filesystem::path& path) const {
    std::ostringstream out;
    out << kMagic << '\n' << canonical_header(beam_, quad_, r_.size(), z_.size());
    auto row = [&out](const char* tag, auto first, auto last) {
        out << tag;
        for (auto it = first; it != last; ++it) out << ' ' << fmt::format("{:.17g}", *it);
        out << '\n';
    };
    row("r", r_.begin(), r_.end());
    row("z", z_.begin(), z_.end());
    for (std::size_t iz = 0; iz < z_.size(); ++iz) {
        auto first = values_.begin() + static_cast<std::ptrdiff_t>(iz * r_.size());
        row("v", first, first + static_cast<std::ptrdiff_t>(r_.size()));
    }

    // Write then rename so a failed write never leaves a truncated cache entry.
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write intensity map cache " + tmp.string());
        f << out.str();
        if (!f.flush()) throw std::runtime_error("failed writing intensity map cache " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

IntensityMap IntensityMap::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open intensity map cache " + path.string());
    std::string line;
    std::getline(f, line);
    if (line != kMagic) throw std::runtime_error("not an intensity map cache: " + path.string());

    BeamSpec beam;
    QuadratureSpec quad;
    std::size_t nr = 0, nz = 0;
    auto expect = [&](const char* key) {
        std::string k;
        f >> k;
        if (k != key) throw std::runtime_error(fmt::format("map cache: expected '{}', found '{}'", key, k));
    };
    auto real = [&] {
        std::string tok;
        f >> tok;
        return std::strtod(tok.c_str(), nullptr);
    };
    expect("order_n"); beam.order_n = real();
    expect("waist_w"); beam.waist_w = real();
    expect("wavelength"); beam.wavelength = real();
    expect("cutoff"); quad.input_radius_cutoff = real();
    expect("spacing"); quad.input_sample_spacing = real();
    expect("max_refinement"); f >> quad.max_refinement;
    expect("nr"); f >> nr;
    expect("nz"); f >> nz;

    std::vector<double> r(nr), z(nz), v(nr * nz);
    expect("r");
    for (auto& x : r) x = real();
    expect("z");
    for (auto& x : z) x = real();
    for (std::size_t iz = 0; iz < nz; ++iz) {
        expect("v");
        for (std::size_t ir = 0; ir < nr; ++ir) v[iz * nr + ir] = real();
    }
    if (!f) throw std::runtime_error("truncated intensity map cache " + path.string());
    return IntensityMap(std::move(r), std::move(z), std::move(v), beam, quad);
}

}  // namespace sgq
