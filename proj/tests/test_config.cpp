#include <doctest.h>

#include "sgq/config.hpp"
#include "sgq/constants.hpp"

using namespace sgq;

TEST_SUITE("config") {

TEST_CASE("defaults dump and parse back unchanged") {
    const AppConfig def;
    const std::string text = dump_config(def);
    const AppConfig back = parse_config(text);
    CHECK(dump_config(back) == text);
    CHECK_NOTHROW(validate_config(back));
    CHECK(parse_config("{}").rng_seed == def.rng_seed);
}

TEST_CASE("edited values survive the round trip") {
    const std::string yaml = R"(
rng_seed: 42
trap: {motion_model: four_beam, period_um: 3.9}
beams:
  orders: [2, {order: 6, width_um: 3.1}, {order: 8, width_um: auto}]
  grid: {z_max_um: 20}
raman: {detuning_GHz: 100, power_uW: 25}
ensemble: {n_atoms: 12, temperature_uK: 5}
output: {dir: results, map_cache: maps}
sweep:
  - {label: a, order: 6, offset_x_um: 0.15}
  - {label: b, noise_fraction: 0.02}
)";
    const AppConfig c = parse_config(yaml);
    CHECK(c.rng_seed == 42);
    CHECK(c.trap.motion_model == TrapModel::four_beam);
    REQUIRE(c.beams.orders.size() == 3);
    CHECK(c.beams.orders[1].width_um == 3.1);
    CHECK_FALSE(c.beams.orders[2].width_um.has_value());
    CHECK(c.beams.z_max_um == 20.0);
    REQUIRE(c.sweep.size() == 2);
    CHECK(c.sweep[0].offset_x_um == 0.15);
    CHECK_FALSE(c.sweep[1].order.has_value());
    const std::string text = dump_config(c);
    CHECK(dump_config(parse_config(text)) == text);
}

TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(parse_config("rng_sed: 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("trap: {period: 3.8}"), ConfigError);
    CHECK_THROWS_AS(parse_config("beams: {grid: {dz: 1}}"), ConfigError);
    CHECK_THROWS_AS(parse_config("sweep: [{label: x, orderr: 2}]"), ConfigError);
    CHECK_THROWS_AS(parse_config("trap: {motion_model: cubic}"), ConfigError);
    CHECK_THROWS_AS(parse_config("ensemble: {n_atoms: many}"), ConfigError);
    CHECK_THROWS_AS(parse_config("raman: {detuning_reference: D1}"), ConfigError);
    CHECK_THROWS_AS(parse_config("trap: [1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_config("a: [unclosed"), ConfigError);

    AppConfig c;
    c.trap.waist_um = 4.0;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = AppConfig{};
    c.ensemble.temperature_uK = -1.0;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = AppConfig{};
    c.raman.detuning_GHz = 0.0;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
}

TEST_CASE("SI conversions") {
    const AppConfig c;
    const TrapConfig t = trap_config(c);
    CHECK(t.period_d == doctest::Approx(3.8e-6));
    CHECK(t.polarizability_alpha == doctest::Approx(polarizability_cgs_to_si(-250e-24)));
    CHECK(beam_width(c, 2) == doctest::Approx(2.3e-6));
    CHECK(beam_width(c, 6) * 1e6 == doctest::Approx(3.09).epsilon(0.002));
    const BeamSpec b = beam_spec(c, 4);
    CHECK(b.order_n == 4.0);
    CHECK(b.wavelength == doctest::Approx(459e-9));
    const RamanConfig r = raman_config(c);
    CHECK(r.center_rabi() / (phys::two_pi * 1e3) == doctest::Approx(23.4).epsilon(0.01));
    const RamanConfig far = raman_config(c, 100.0, 25.0);
    CHECK(far.power1 == doctest::Approx(25e-6));
}

TEST_CASE("scenario construction from overrides") {
    const AppConfig c;
    const Scenario base = base_scenario(c);
    CHECK(base.n_atoms == 100);
    CHECK(base.n_repeats == 10);
    CHECK(base.beam.order_n == 2.0);
    ScenarioOverride o;
    o.order = 6;
    o.offset_x_um = 1.0;
    o.temperature_uK = 10;
    const Scenario s = apply_override(c, o);
    CHECK(s.beam.order_n == 6.0);
    CHECK(s.beam.offset_x == doctest::Approx(1e-6));
    CHECK(s.temperature == doctest::Approx(10e-6));
    CHECK(s.beam.waist_w == doctest::Approx(beam_width(c, 6)));
    CHECK_FALSE(s.label.empty());
}

TEST_CASE("table and variant presets") {
    CHECK(table_rows(4).size() == 6);
    CHECK(table_rows(5).size() == 6);
    CHECK(table_rows(6).size() == 5);
    CHECK_THROWS(table_rows(7));
    CHECK(variant_rows("jitter").size() == 4);
    CHECK(variant_rows("noise").size() == 4);
    CHECK(variant_rows("detuning").size() == 4);
    CHECK_THROWS(variant_rows("nope"));
    for (const auto& row : table_rows(5)) CHECK(row.offset_x_um.has_value());
}

}
