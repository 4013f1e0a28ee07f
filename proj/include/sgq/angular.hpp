#pragma once

#include <stdexcept>

// Clebsch-Gordan coefficients and Wigner 6-j symbols from the Racah sum
// formulas. Arguments are angular momenta given as reals; each must be an
// integer or half-integer. Factorials are tabulated in long double, which is
// exact through 25!, so results are exact to rounding for j up to about 9/2.
namespace sgq::angular {

class AngularMomentumError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// <j1 m1; j2 m2 | J M> in the Condon-Shortley convention. Returns 0 when
// M != m1 + m2. Throws on non-half-integer input, |m| > j, or a triangle
// violation among (j1, j2, J).
double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M);

// {j1 j2 j3; j4 j5 j6}. Throws if any of the four triads violates the
// triangle rule.
double wigner_6j(double j1, double j2, double j3, double j4, double j5, double j6);

}  // namespace sgq::angular
