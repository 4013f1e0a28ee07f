#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <sstream>

#include "sgq/config.hpp"
#include "sgq/constants.hpp"
#include "sgq/ensemble.hpp"

using namespace sgq;

namespace {

Scenario small(double temperature_uK = 20.0) {
    AppConfig cfg;
    cfg.ensemble.temperature_uK = temperature_uK;
    cfg.ensemble.n_atoms = 8;
    cfg.ensemble.n_repeats = 3;
    return base_scenario(cfg);
}

double energy(const PhaseSpace& s, const TrapField& f, double m) {
    return 0.5 * m * (s.v.x * s.v.x + s.v.y * s.v.y + s.v.z * s.v.z) + f(s.r).potential;
}

std::size_t columns(const std::string& line) { return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')); }

}  // namespace

TEST_SUITE("ensemble") {

TEST_CASE("thermal sampling matches the harmonic widths") {
    const TrapConfig trap;
    const auto h = trap_harmonics(trap, 20e-6);
    const int n = 20000;
    double sx = 0, sz = 0, svx = 0;
    int inside = 0;
    for (int i = 0; i < n; ++i) {
        auto rng = atom_rng(3, 1, static_cast<std::uint64_t>(i));
        const auto p = sample_initial(20e-6, h, rng);
        sx += p.r.x * p.r.x;
        sz += p.r.z * p.r.z;
        svx += p.v.x * p.v.x;
        if (std::abs(p.r.z) <= 3.0 * h.sigma_z) ++inside;
    }
    CHECK(std::sqrt(sx / n) == doctest::Approx(h.sigma_x).epsilon(0.03));
    CHECK(std::sqrt(sz / n) == doctest::Approx(h.sigma_z).epsilon(0.03));
    CHECK(svx / n == doctest::Approx(phys::kB * 20e-6 / trap.atom_mass).epsilon(0.03));
    CHECK(inside >= 0.995 * n);

    auto a = atom_rng(1, 2, 3), b = atom_rng(1, 2, 3), c = atom_rng(1, 3, 2);
    CHECK(a() == b());
    CHECK(atom_rng(1, 2, 3)() != c());
}

TEST_CASE("velocity Verlet conserves energy and keeps the period") {
    const TrapConfig cfg;
    const TrapField f(cfg);
    const auto h = trap_harmonics(cfg, 20e-6);
    const PhaseSpace s0{{h.sigma_x, -0.5 * h.sigma_y, h.sigma_z}, {0.0, 0.01, -0.02}};
    const auto tr = integrate_trajectory(s0, f, cfg.atom_mass, 1e-6, 150e-6);
    CHECK(tr.grid.size() == 151);
    CHECK(tr.midpoints.size() == 150);
    const double e0 = energy(s0, f, cfg.atom_mass);
    double drift = 0.0;
    for (const auto& s : tr.grid) drift = std::max(drift, std::abs(energy(s, f, cfg.atom_mass) - e0) / e0);
    CHECK(drift < 1e-6);

    // Downward zero crossings of x, linearly interpolated on a fine grid.
    PhaseSpace s{{h.sigma_x, 0, 0}, {}};
    std::vector<double> crossings;
    const double step = 0.05e-6;
    for (int k = 0; k < 4000; ++k) {
        const PhaseSpace next = advance(s, step, 10, f, cfg.atom_mass);
        if (s.r.x > 0.0 && next.r.x <= 0.0) crossings.push_back(k * step + step * s.r.x / (s.r.x - next.r.x));
        s = next;
    }
    REQUIRE(crossings.size() >= 3);
    const double period = (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    CHECK(period == doctest::Approx(phys::two_pi / h.omega_x).epsilon(1e-3));
    CHECK(period * 1e6 == doctest::Approx(31.8).epsilon(0.005));

    const auto rest = integrate_trajectory(PhaseSpace{}, f, cfg.atom_mass, 1e-6, 20e-6);
    for (const auto& p : rest.grid) CHECK(p.r == Vec3{});
}

TEST_CASE("map grid grows to cover the cloud") {
    Scenario s = small();
    s.beam.offset_z_waist = 5e-6;
    const GridSpec g = map_grid_for(s);
    const auto h = trap_harmonics(s.trap, s.temperature);
    CHECK(g.z_max >= 5e-6 + 8.0 * h.sigma_z);
    CHECK(g.r_max >= s.grid.r_max);
}

TEST_CASE("scenario validation") {
    Scenario s = small();
    CHECK_NOTHROW(s.validate());
    s.dt = 5e-6;
    CHECK_THROWS(s.validate());
    s = small();
    s.t_total = 20e-6;
    CHECK_THROWS(s.validate());
    s = small();
    s.substeps = 3;
    CHECK_THROWS(s.validate());
    s = small();
    s.noise_fraction = 1.5;
    CHECK_THROWS(s.validate());
}

TEST_CASE("results are independent of the thread count") {
    const Scenario s = small();
    MapCache maps;
    const auto r1 = run_scenario(s, maps, 1);
    const auto r4 = run_scenario(s, maps, 4);
    const auto r8 = run_scenario(s, maps, 8);
    CHECK(r1.mean_pop == r4.mean_pop);
    CHECK(r1.mean_pop == r8.mean_pop);
    CHECK(r1.summary.t_a.mean == r8.summary.t_a.mean);
    CHECK(population_csv(r1) == population_csv(r4));
    for (double p : r1.mean_pop) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    CHECK(r1.times.size() == 151);
    CHECK(r1.mean_pop.front() == 0.0);
    CHECK(r1.repeats.size() == 3);

    Scenario other = s;
    other.rng_seed = 2;
    CHECK(run_scenario(other, maps, 1).mean_pop != r1.mean_pop);
}

TEST_CASE("sweep isolates failures and handles an empty list") {
    MapCache maps;
    CHECK(sweep(std::vector<Scenario>{}, maps).empty());

    std::vector<Scenario> list{small(), small()};
    list[1].label = "bad, row";
    list[1].raman.detuning_R = cesium().excited_shift_F4;
    const auto items = sweep(list, maps, 2);
    REQUIRE(items.size() == 2);
    CHECK(items[0].result.has_value());
    CHECK_FALSE(items[1].result.has_value());
    CHECK_FALSE(items[1].error.empty());

    std::istringstream csv(summary_csv(items));
    std::string header, ok, bad;
    std::getline(csv, header);
    std::getline(csv, ok);
    std::getline(csv, bad);
    CHECK(columns(ok) == columns(header));
    CHECK(columns(bad) == columns(header));
    CHECK(bad.rfind("bad; row", 0) == 0);
}

TEST_CASE("colder atoms dephase more slowly") {
    AppConfig cfg;
    std::vector<Scenario> list;
    for (double t : {5.0, 10.0, 20.0}) {
        cfg.ensemble.temperature_uK = t;
        list.push_back(base_scenario(cfg));
    }
    MapCache maps;
    const auto items = sweep(list, maps);
    auto median_ta = [](const EnsembleResult& r) {
        std::vector<double> v;
        for (const auto& rep : r.repeats)
            if (rep.fit.converged) v.push_back(rep.fit.t_a);
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
        return v[v.size() / 2];
    };
    const double t5 = median_ta(*items[0].result), t10 = median_ta(*items[1].result),
                 t20 = median_ta(*items[2].result);
    CHECK(t5 > t10);
    CHECK(t10 > t20);
}

TEST_CASE("two percent power noise barely moves the pi population") {
    AppConfig cfg;
    std::vector<Scenario> list{base_scenario(cfg), base_scenario(cfg)};
    list[1].noise_fraction = 0.02;
    MapCache maps;
    const auto items = sweep(list, maps);
    const double a = items[0].result->summary.pi_pop.mean, b = items[1].result->summary.pi_pop.mean;
    CHECK(std::abs(a - b) < 1e-3);
    CHECK(a != b);
}

}
