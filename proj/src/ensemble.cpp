#include "sgq/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <stdexcept>

#include "sgq/constants.hpp"
#include "sgq/parallel.hpp"

namespace sgq {

int Scenario::steps() const { return static_cast<int>(std::llround(t_total / dt)); }

std::vector<std::string> Scenario::validate() const {
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (n_atoms < 1 || n_repeats < 1) throw std::invalid_argument("atom and repeat counts must be positive");
    if (!(dt > 0.0) || !(t_total >= dt)) throw std::invalid_argument("need 0 < dt <= t_total");
    if (std::abs(steps() * dt - t_total) > 1e-9 * t_total)
        throw std::invalid_argument("t_total must be a whole number of dt steps");
    if (steps() < 29) throw std::invalid_argument("need at least 30 time samples for the Rabi fit");
    if (substeps < 2 || substeps % 2 != 0) throw std::invalid_argument("substeps must be even and >= 2");
    if (!(noise_fraction >= 0.0 && noise_fraction < 1.0)) throw std::invalid_argument("noise fraction must be in [0, 1)");
    if (!(thompson_alpha > 0.0 && thompson_alpha < 1.0)) throw std::invalid_argument("Thompson alpha must be in (0, 1)");
    beam.validate();
    trap.validate();
    grid.validate();
    auto warnings = raman.validate();
    const auto h = trap_harmonics(trap, temperature);
    if (!(dt < phys::two_pi / (10.0 * h.omega_x)))
        throw std::invalid_argument(fmt::format("dt = {:.3g} us is not below 2 pi/(10 omega_x) = {:.3g} us", dt * 1e6,
                                                phys::two_pi / (10.0 * h.omega_x) * 1e6));
    return warnings;
}

GridSpec map_grid_for(const Scenario& s) {
    const auto h = trap_harmonics(s.trap, s.temperature);
    auto whole_um = [](double x) { return std::ceil(x * 1e6 - 1e-9) * 1e-6; };
    GridSpec g = s.grid;
    g.r_max = std::max(g.r_max, whole_um(std::hypot(s.beam.offset_x, s.beam.offset_y) + 8.0 * h.sigma_x));
    g.z_max = std::max(g.z_max, whole_um(std::abs(s.beam.offset_z_waist) + 8.0 * h.sigma_z));
    return g;
}

std::mt19937_64 atom_rng(std::uint64_t seed, std::uint64_t repeat, std::uint64_t atom) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(repeat), static_cast<std::uint32_t>(repeat >> 32),
                      static_cast<std::uint32_t>(atom), static_cast<std::uint32_t>(atom >> 32)};
    return std::mt19937_64(seq);
}

PhaseSpace sample_initial(double temperature, const TrapHarmonics& h, std::mt19937_64& rng) {
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    const double scale = std::sqrt(temperature / h.temperature);
    std::normal_distribution<double> g(0.0, 1.0);
    PhaseSpace s;
    s.r = {h.sigma_x * scale * g(rng), h.sigma_y * scale * g(rng), h.sigma_z * scale * g(rng)};
    s.v = {h.omega_x * h.sigma_x * scale * g(rng), h.omega_y * h.sigma_y * scale * g(rng),
           h.omega_z * h.sigma_z * scale * g(rng)};
    return s;
}

PhaseSpace advance(PhaseSpace s, double duration, int substeps, const TrapField& field, double mass) {
    if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
    const double h = duration / substeps;
    const double inv_m = 1.0 / mass;
    Vec3 a = field.force(s.r) * inv_m;
    for (int i = 0; i < substeps; ++i) {
        s.v += a * (0.5 * h);
        s.r += s.v * h;
        a = field.force(s.r) * inv_m;
        s.v += a * (0.5 * h);
    }
    return s;
}

Trajectory integrate_trajectory(const PhaseSpace& initial, const TrapField& field, double mass, double dt,
                                double t_total, int substeps) {
    if (substeps < 2 || substeps % 2 != 0) throw std::invalid_argument("substeps must be even and >= 2");
    const auto n = static_cast<std::size_t>(std::llround(t_total / dt));
    Trajectory tr;
    tr.grid.reserve(n + 1);
    tr.midpoints.reserve(n);
    tr.grid.push_back(initial);
    PhaseSpace s = initial;
    for (std::size_t k = 0; k < n; ++k) {
        s = advance(s, 0.5 * dt, substeps / 2, field, mass);
        tr.midpoints.push_back(s.r);
        s = advance(s, 0.5 * dt, substeps / 2, field, mass);
        tr.grid.push_back(s);
    }
    return tr;
}

namespace {

Stat stat_of(const std::vector<double>& v) {
    Stat s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

struct AtomOutcome {
    std::vector<PhaseSpace> grid;
    std::vector<SpinState> spin;
    double power_factor = 1.0;
    double init_rabi = 0.0;
    double init_stark = 0.0;
    double init_trap_stark = 0.0;
};

AddressingBeam make_beam(const Scenario& s, MapCache& maps) {
    if (s.beam.order_n == 2.0) return AddressingBeam(s.beam);
    const QuadratureSpec quad = QuadratureSpec::for_beam(s.beam, s.amplitude_floor, s.spacing_fraction);
    return AddressingBeam(s.beam, maps.get(s.beam, map_grid_for(s), quad));
}

TrapConfig with_model(TrapConfig cfg, TrapModel m) {
    cfg.model = m;
    return cfg;
}

class ScenarioRun {
public:
    ScenarioRun(const Scenario& s, MapCache& maps)
        : s_(s),
          warnings_(s.validate()),
          h_(trap_harmonics(s.trap, s.temperature)),
          motion_(s.trap),
          stark_(with_model(s.trap, s.stark_model)),
          beam_(make_beam(s, maps)),
          ctx_(ControlContext::calibrate([b = beam_](const Vec3& p) { return b.intensity(p); },
                                         with_model(s.trap, s.stark_model), s.raman)),
          steps_(s.steps()),
          atoms_(static_cast<std::size_t>(s.n_repeats) * static_cast<std::size_t>(s.n_atoms)),
          errors_(atoms_.size()) {}

    std::size_t tasks() const { return atoms_.size(); }

    void run_task(std::size_t idx) {
        try {
            simulate(idx);
        } catch (const std::exception& e) {
            errors_[idx] = e.what();
        }
    }

    EnsembleResult finish() const;

private:
    void simulate(std::size_t idx);
    SpinState state_at(const AtomOutcome& a, double t) const;

    Scenario s_;
    std::vector<std::string> warnings_;
    TrapHarmonics h_;
    TrapField motion_;
    TrapField stark_;
    AddressingBeam beam_;
    ControlContext ctx_;
    int steps_;
    std::vector<AtomOutcome> atoms_;
    std::vector<std::string> errors_;
};

void ScenarioRun::simulate(std::size_t idx) {
    const auto repeat = idx / static_cast<std::size_t>(s_.n_atoms);
    const auto atom = idx % static_cast<std::size_t>(s_.n_atoms);
    auto rng = atom_rng(s_.rng_seed, repeat, atom);
    const PhaseSpace init = sample_initial(s_.temperature, h_, rng);

    AtomOutcome out;
    if (s_.noise_fraction > 0.0) {
        std::uniform_real_distribution<double> u(1.0 - 0.5 * s_.noise_fraction, 1.0 + 0.5 * s_.noise_fraction);
        out.power_factor = u(rng);
    }
    const double i0 = beam_.intensity(init.r) * out.power_factor;
    out.init_rabi = ctx_.rabi_center * i0;
    out.init_stark = ctx_.stark_center * i0;
    out.init_trap_stark = stark_.stark_shift(init.r);

    const double mass = s_.trap.atom_mass;
    out.grid.reserve(static_cast<std::size_t>(steps_) + 1);
    out.spin.reserve(static_cast<std::size_t>(steps_) + 1);
    PhaseSpace ps = init;
    SpinState spin;
    out.grid.push_back(ps);
    out.spin.push_back(spin);
    const int half = s_.substeps / 2;
    for (int k = 0; k < steps_; ++k) {
        ps = advance(ps, 0.5 * s_.dt, half, motion_, mass);
        const LocalControls c = local_controls(ps.r, ctx_, stark_, out.power_factor);
        spin = evolve(spin, c, k * s_.dt, s_.dt);
        ps = advance(ps, 0.5 * s_.dt, half, motion_, mass);
        out.grid.push_back(ps);
        out.spin.push_back(spin);
    }
    atoms_[idx] = std::move(out);
}

// State at an arbitrary time: the stored grid state plus one partial step with
// controls taken at the partial interval's midpoint.
SpinState ScenarioRun::state_at(const AtomOutcome& a, double t) const {
    const int k = std::clamp(static_cast<int>(std::floor(t / s_.dt)), 0, steps_);
    const double tk = k * s_.dt;
    const double tau = t - tk;
    if (tau <= 0.0 || k == steps_) return a.spin[static_cast<std::size_t>(k)];
    const double h = s_.dt / s_.substeps;
    const int n = std::max(1, static_cast<int>(std::ceil(0.5 * tau / h)));
    const PhaseSpace mid = advance(a.grid[static_cast<std::size_t>(k)], 0.5 * tau, n, motion_, s_.trap.atom_mass);
    return evolve(a.spin[static_cast<std::size_t>(k)], local_controls(mid.r, ctx_, stark_, a.power_factor), tk, tau);
}

EnsembleResult ScenarioRun::finish() const {
    for (const auto& e : errors_)
        if (!e.empty()) throw std::runtime_error(e);

    EnsembleResult res;
    res.scenario = s_;
    res.warnings = warnings_;
    res.calibration_rabi = ctx_.rabi_center;
    res.calibration_stark = ctx_.stark_center;
    const std::size_t nt = static_cast<std::size_t>(steps_) + 1;
    res.times.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) res.times[k] = static_cast<double>(k) * s_.dt;

    const auto na = static_cast<std::size_t>(s_.n_atoms);
    const double t_end = steps_ * s_.dt;
    double sum_rabi = 0.0, sum_stark = 0.0;
    for (std::size_t rep = 0; rep < static_cast<std::size_t>(s_.n_repeats); ++rep) {
        RepeatResult rr;
        rr.mean_pop.assign(nt, 0.0);
        rr.sigma_pop.assign(nt, 0.0);
        for (std::size_t a = 0; a < na; ++a) {
            const auto& atom = atoms_[rep * na + a];
            for (std::size_t k = 0; k < nt; ++k) rr.mean_pop[k] += atom.spin[k].excited_population();
            rr.mean_init_rabi += atom.init_rabi;
            rr.mean_init_stark += atom.init_stark;
            rr.mean_init_trap_stark += atom.init_trap_stark;
        }
        for (auto& m : rr.mean_pop) m /= static_cast<double>(na);
        if (na > 1) {
            for (std::size_t a = 0; a < na; ++a) {
                const auto& atom = atoms_[rep * na + a];
                for (std::size_t k = 0; k < nt; ++k) {
                    const double d = atom.spin[k].excited_population() - rr.mean_pop[k];
                    rr.sigma_pop[k] += d * d;
                }
            }
            for (auto& s : rr.sigma_pop) s = std::sqrt(s / static_cast<double>(na - 1));
        }
        sum_rabi += rr.mean_init_rabi;
        sum_stark += rr.mean_init_stark;
        rr.mean_init_rabi /= static_cast<double>(na);
        rr.mean_init_stark /= static_cast<double>(na);
        rr.mean_init_trap_stark /= static_cast<double>(na);

        rr.fit = fit_rabi_decay(res.times, rr.mean_pop);
        if (rr.fit.converged && rr.fit.omega_prime > 0.0) {
            rr.t_pi = std::numbers::pi / rr.fit.omega_prime;
            auto mean_at = [&](double t) {
                if (t > t_end) return std::numeric_limits<double>::quiet_NaN();
                double m = 0.0;
                for (std::size_t a = 0; a < na; ++a) m += state_at(atoms_[rep * na + a], t).excited_population();
                return m / static_cast<double>(na);
            };
            rr.pi_pop = mean_at(rr.t_pi);
            rr.three_pi_pop = mean_at(3.0 * rr.t_pi);
        }
        res.repeats.push_back(std::move(rr));
    }
    const double total = static_cast<double>(na) * s_.n_repeats;
    res.mean_init_rabi = sum_rabi / total;
    res.mean_init_stark = sum_stark / total;
    res.mean_pop = res.repeats.front().mean_pop;
    res.sigma_pop = res.repeats.front().sigma_pop;

    // Repeats with usable fits, then Thompson-tau screening on t_a in pi-time units.
    std::vector<std::size_t> used;
    for (std::size_t r = 0; r < res.repeats.size(); ++r) {
        const auto& rr = res.repeats[r];
        if (rr.fit.converged && rr.t_pi > 0.0 && std::isfinite(rr.pi_pop) && std::isfinite(rr.three_pi_pop))
            used.push_back(r);
    }
    EnsembleSummary& sm = res.summary;
    sm.failed_fits = static_cast<int>(res.repeats.size() - used.size());
    std::vector<std::size_t> kept = used;
    if (used.size() >= 3) {
        std::vector<double> ratio;
        for (auto r : used) ratio.push_back(res.repeats[r].fit.t_a / res.repeats[r].t_pi);
        const auto th = thompson_tau_filter(ratio, s_.thompson_alpha);
        kept.clear();
        for (auto i : th.retained) kept.push_back(used[i]);
        sm.outliers = static_cast<int>(th.removed.size());
    }
    sm.used_repeats = static_cast<int>(kept.size());

    auto collect = [&](auto get) {
        std::vector<double> v;
        for (auto r : kept) v.push_back(get(res.repeats[r]));
        return stat_of(v);
    };
    sm.stark = collect([](const RepeatResult& r) { return r.mean_init_stark; });
    sm.rabi = collect([](const RepeatResult& r) { return r.mean_init_rabi; });
    sm.omega_prime = collect([](const RepeatResult& r) { return r.fit.omega_prime; });
    sm.t_a = collect([](const RepeatResult& r) { return r.fit.t_a; });
    sm.t_a_over_pi = collect([](const RepeatResult& r) { return r.fit.t_a / (100.0 * r.t_pi); });
    sm.pi_pop = collect([](const RepeatResult& r) { return r.pi_pop; });
    sm.three_pi_pop = collect([](const RepeatResult& r) { return r.three_pi_pop; });
    sm.trap_stark = collect([](const RepeatResult& r) { return r.mean_init_trap_stark; });
    return res;
}

}  // namespace

EnsembleResult run_scenario(const Scenario& s, MapCache& maps, unsigned threads) {
    ScenarioRun run(s, maps);
    parallel_for(run.tasks(), threads, [&](std::size_t i) { run.run_task(i); });
    return run.finish();
}

std::vector<SweepItem> sweep(std::span<const Scenario> scenarios, MapCache& maps, unsigned threads) {
    std::vector<SweepItem> items(scenarios.size());
    std::vector<std::optional<ScenarioRun>> runs(scenarios.size());
    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        items[i].scenario = scenarios[i];
        try {
            runs[i].emplace(scenarios[i], maps);
            for (std::size_t t = 0; t < runs[i]->tasks(); ++t) tasks.emplace_back(i, t);
        } catch (const std::exception& e) {
            items[i].error = e.what();
        }
    }
    parallel_for(tasks.size(), threads, [&](std::size_t k) { runs[tasks[k].first]->run_task(tasks[k].second); });
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        if (!runs[i]) continue;
        try {
            items[i].result = runs[i]->finish();
        } catch (const std::exception& e) {
            items[i].error = e.what();
        }
    }
    return items;
}

namespace {

double khz(double rad_s) { return rad_s / phys::two_pi * 1e-3; }

std::string csv_field(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

std::string population_csv(const EnsembleResult& r) {
    std::string out = "time_us,mean_pop,sigma_pop\n";
    for (std::size_t k = 0; k < r.times.size(); ++k)
        out += fmt::format("{:.6f},{:.12g},{:.12g}\n", r.times[k] * 1e6, r.mean_pop[k], r.sigma_pop[k]);
    return out;
}

std::string summary_csv(std::span<const SweepItem> items) {
    std::string out =
        "label,n,T_uK,dx_um,dz_um,noise_fraction,stark_kHz,stark_sd_kHz,rabi_kHz,rabi_sd_kHz,"
        "omega_prime_kHz,omega_prime_sd_kHz,t_a_ms,t_a_sd_ms,t_a_pi100,t_a_pi100_sd,pi_pop_pct,pi_pop_sd_pct,"
        "three_pi_pop_pct,three_pi_pop_sd_pct,trap_stark_kHz,trap_stark_sd_kHz,used_repeats,failed_fits,"
        "outliers,error\n";
    for (const auto& it : items) {
        const Scenario& s = it.scenario;
        out += fmt::format("{},{:g},{:g},{:g},{:g},{:g},", csv_field(s.label), s.beam.order_n, s.temperature * 1e6,
                           s.beam.offset_x * 1e6, s.beam.offset_z_waist * 1e6, s.noise_fraction);
        if (!it.result) {
            out += ",,,,,,,,,,,,,,,,,,,";
            out += csv_field(it.error) + "\n";
            continue;
        }
        const auto& m = it.result->summary;
        out += fmt::format("{:.6g},{:.3g},{:.6g},{:.3g},{:.6g},{:.3g},{:.6g},{:.3g},{:.6g},{:.3g},{:.6g},{:.3g},"
                           "{:.6g},{:.3g},{:.6g},{:.3g},{},{},{},\n",
                           khz(m.stark.mean), khz(m.stark.std), khz(m.rabi.mean), khz(m.rabi.std),
                           khz(m.omega_prime.mean), khz(m.omega_prime.std), m.t_a.mean * 1e3, m.t_a.std * 1e3,
                           m.t_a_over_pi.mean, m.t_a_over_pi.std, m.pi_pop.mean * 100.0, m.pi_pop.std * 100.0,
                           m.three_pi_pop.mean * 100.0, m.three_pi_pop.std * 100.0, khz(m.trap_stark.mean),
                           khz(m.trap_stark.std), m.used_repeats, m.failed_fits, m.outliers);
    }
    return out;
}

}  // namespace sgq
