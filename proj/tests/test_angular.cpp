#include <cmath>
#include <doctest.h>

#include "sgq/angular.hpp"

using namespace sgq::angular;

TEST_SUITE("angular") {

TEST_CASE("Clebsch-Gordan values against closed forms") {
    // <1/2 1/2; 1/2 -1/2 | 1 0> = 1/sqrt2, <1/2 1/2; 1/2 -1/2 | 0 0> = 1/sqrt2
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 1, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0, 0) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-14));
    // <1 1; 1 -1 | 2 0> = 1/sqrt6, <1 0; 1 0 | 1 0> = 0
    CHECK(clebsch_gordan(1, 1, 1, -1, 2, 0) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-14));
    CHECK(std::abs(clebsch_gordan(1, 0, 1, 0, 1, 0)) < 1e-15);
    // Stretched state.
    CHECK(clebsch_gordan(4, 4, 1, 1, 5, 5) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Clebsch-Gordan orthonormality for j1 = 4, j2 = 1") {
    for (double J1 = 3; J1 <= 5; ++J1)
        for (double J2 = 3; J2 <= 5; ++J2) {
            const double M = 1;
            double s = 0;
            for (double m1 = -4; m1 <= 4; ++m1) {
                const double m2 = M - m1;
                if (std::abs(m2) > 1) continue;
                s += clebsch_gordan(4, m1, 1, m2, J1, M) * clebsch_gordan(4, m1, 1, m2, J2, M);
            }
            CHECK(s == doctest::Approx(J1 == J2 ? 1.0 : 0.0).epsilon(1e-13));
        }
}

TEST_CASE("Clebsch-Gordan selection rules") {
    CHECK(clebsch_gordan(1, 1, 1, 0, 2, 0) == 0.0);
    CHECK_THROWS_AS(clebsch_gordan(1, 2, 1, 0, 2, 2), AngularMomentumError);
    CHECK_THROWS_AS(clebsch_gordan(1, 0, 1, 0, 3, 0), AngularMomentumError);
    CHECK_THROWS_AS(clebsch_gordan(0.3, 0, 1, 0, 1, 0), AngularMomentumError);
}

TEST_CASE("6-j symbols against tabulated values") {
    // {1/2 1/2 1; 1/2 1/2 0} = 1/2 (up to sign (-1)^{...}); {1 1 1; 1 1 1} = 1/6
    CHECK(wigner_6j(1, 1, 1, 1, 1, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(wigner_6j(0.5, 0.5, 1, 0.5, 0.5, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(wigner_6j(1, 1, 0, 1, 1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    // {a b c; 0 c b} = (-1)^{a+b+c} / sqrt((2b+1)(2c+1))
    CHECK(wigner_6j(2, 3, 1, 0, 1, 3) == doctest::Approx(1.0 / std::sqrt(21.0)).epsilon(1e-14));
    CHECK(wigner_6j(0.5, 3.5, 4, 0, 4, 3.5) == doctest::Approx(1.0 / std::sqrt(72.0)).epsilon(1e-14));
}

TEST_CASE("6-j symmetry and triangle rules") {
    const double a = wigner_6j(0.5, 3.5, 3, 1, 3, 3.5);
    CHECK(a != 0.0);
    CHECK(wigner_6j(3.5, 0.5, 3, 3, 1, 3.5) == doctest::Approx(a).epsilon(1e-14));   // column swap
    CHECK(wigner_6j(1, 3, 3, 0.5, 3.5, 3.5) == doctest::Approx(a).epsilon(1e-14));   // row swap in two columns
    CHECK_THROWS_AS(wigner_6j(1, 1, 3, 1, 1, 1), AngularMomentumError);
}

}
