#include <doctest.h>

#include <cmath>

#include "rydgate/commands.hpp"
#include "rydgate/config.hpp"

using namespace rydgate;

TEST_CASE("value parsing with units and the 2pi prefix") {
    CHECK(parse_value("2pi*133.04 MHz") ==
          doctest::Approx(2.0 * kPi * 133.04e6));
    CHECK(parse_value("21.5 us") == doctest::Approx(21.5e-6));
    CHECK(parse_value("1 kHz") == doctest::Approx(1000.0));
    CHECK(parse_value("pi/2") == doctest::Approx(kPi / 2.0));
    CHECK(parse_value("pi") == doctest::Approx(kPi));
    CHECK(parse_value("90 deg") == doctest::Approx(kPi / 2.0));
    CHECK(parse_value("0.37 rad") == doctest::Approx(0.37));
    CHECK(std::isinf(parse_value("inf")));
    CHECK(parse_value("-1e-3") == doctest::Approx(-1e-3));
    CHECK_THROWS_AS((void)parse_value("12 parsec", "x"), ConfigError);
    CHECK_THROWS_AS((void)parse_value("wat", "x"), ConfigError);
}

TEST_CASE("defaults mirror the design preset") {
    const ScenarioConfig cfg = parse_config("");
    CHECK(cfg.gate == "cnot");
    CHECK(cfg.v_a == doctest::Approx(kPi / 2.0));
    CHECK(cfg.v_b == doctest::Approx(kPi / 4.0));
    CHECK(cfg.VT == doctest::Approx(18000.0));
    CHECK(cfg.omega_bT == doctest::Approx(600.0));
    CHECK(cfg.T_SI == doctest::Approx(21.5e-6));
    const ModelParams p = cfg.model_params();
    CHECK(p.V == doctest::Approx(18000.0));
    CHECK(p.Delta == doctest::Approx(p.V));
    CHECK(p.omega_b == doctest::Approx(600.0));
    CHECK(p.T == doctest::Approx(1.0));
    CHECK(cfg.snr_is_db);
}

TEST_CASE("gate selection and custom angles") {
    CHECK(parse_config("gate = cz").v_b == doctest::Approx(kPi));
    const ScenarioConfig custom =
        parse_config("gate = custom\nv_a = pi/3\nv_b = 0.4 rad");
    CHECK(custom.v_a == doctest::Approx(kPi / 3.0));
    CHECK(custom.v_b == doctest::Approx(0.4));
    CHECK_THROWS_AS((void)parse_config("gate = custom\nv_a = 1"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("gate = hadamard"), ConfigError);
}

TEST_CASE("T and V derivation rules") {
    // Only V: T derived through the design product.
    const ScenarioConfig v_only = parse_config("V = 2pi*133.04 MHz");
    CHECK(v_only.T_SI ==
          doctest::Approx(18000.0 / (2.0 * kPi * 133.04e6)));
    CHECK(v_only.VT == doctest::Approx(18000.0));
    // Both: product taken literally, no derivation.
    const ScenarioConfig both =
        parse_config("T = 10 us\nV = 2pi*100 MHz");
    CHECK(both.VT == doctest::Approx(2.0 * kPi * 100e6 * 10e-6));
    CHECK_THROWS_AS(
        (void)parse_config("T = 10 us\nV = 2pi*100 MHz\nVT = 18000"),
        ConfigError);
    CHECK_THROWS_AS((void)parse_config("omega_b = 1 MHz\nomega_b_T = 600"),
                    ConfigError);
}

TEST_CASE("error channels scale with T") {
    const ScenarioConfig cfg = parse_config(
        "T = 21.5 us\ngamma = 1 kHz\ndelta = 2pi*8.5 MHz\nepsilon = 0.05");
    CHECK(cfg.gammaT == doctest::Approx(1000.0 * 21.5e-6));
    CHECK(cfg.deltaT == doctest::Approx(2.0 * kPi * 8.5e6 * 21.5e-6));
    CHECK(cfg.epsilon == doctest::Approx(0.05));
}

TEST_CASE("config rejections carry the field name") {
    try {
        (void)parse_config("weird_key = 3");
        CHECK(false);
    } catch (const ConfigError& e) {
        CHECK(e.field() == "weird_key");
    }
    CHECK_THROWS_AS((void)parse_config("eta = -1"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("snr = 0"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("gamma = -1 kHz"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("just a line"), ConfigError);
}

TEST_CASE("initial state parsing") {
    const ScenarioConfig cfg = parse_config("initial_state = 00+10");
    const Vector psi = cfg.initial_ket();
    CHECK(std::abs(psi.dot(computational_ket(0)) - 1.0 / std::sqrt(2.0)) <
          1e-12);
    CHECK(std::abs(psi.dot(computational_ket(2)) - 1.0 / std::sqrt(2.0)) <
          1e-12);
    CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
    ScenarioConfig bad = cfg;
    bad.initial_state = "cat";
    CHECK_THROWS_AS((void)bad.initial_ket(), ConfigError);
}

TEST_CASE("canonical form and hash are stable and discriminating") {
    const ScenarioConfig a = parse_config("eta = 1\nseed = 7");
    const ScenarioConfig b = parse_config("seed = 7\neta = 1");
    CHECK(a.canonical() == b.canonical());
    CHECK(a.hash() == b.hash());
    const ScenarioConfig c = parse_config("eta = 1\nseed = 8");
    CHECK(a.hash() != c.hash());
}

TEST_CASE("unit round-trip: SI and dimensionless configs match") {
    // T = 21.5 us with the design products, versus the T = 1 s dimensionless
    // convention: identical dimensionless model and trajectory.
    const ScenarioConfig si = parse_config("T = 21.5 us");
    const ScenarioConfig unitless = parse_config("T = 1 s");
    const ModelParams pa = si.model_params();
    const ModelParams pb = unitless.model_params();
    CHECK(pa.V == pb.V);
    CHECK(pa.omega_b == pb.omega_b);
    CHECK(pa.T == pb.T);
    const InvariantTrajectory ta = si.trajectory();
    const InvariantTrajectory tb = unitless.trajectory();
    CHECK(ta.duration == tb.duration);
    CHECK(ta.samples.size() == tb.samples.size());
    CHECK(ta.samples[1000].mu2 == tb.samples[1000].mu2);
}
