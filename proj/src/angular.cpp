#include "sgq/angular.hpp"

#include <array>
#include <cmath>
#include <fmt/format.h>

namespace sgq::angular {
namespace {

constexpr int kMaxFactorial = 100;

const std::array<long double, kMaxFactorial + 1>& factorials() {
    static const auto table = [] {
        std::array<long double, kMaxFactorial + 1> f{};
        f[0] = 1.0L;
        for (int i = 1; i <= kMaxFactorial; ++i) f[i] = f[i - 1] * static_cast<long double>(i);
        return f;
    }();
    return table;
}

// Factorial of a doubled argument (n2 = 2n). n2 must be even and >= 0.
long double fact2(int n2) {
    if (n2 < 0 || n2 % 2 != 0 || n2 / 2 > kMaxFactorial)
        throw AngularMomentumError(fmt::format("factorial argument {}/2 out of range", n2));
    return factorials()[n2 / 2];
}

int twice(double j) {
    const double t = 2.0 * j;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-9) throw AngularMomentumError(fmt::format("{} is not a half-integer", j));
    return static_cast<int>(r);
}

bool triangle(int a, int b, int c) {
    return a >= 0 && b >= 0 && c >= 0 && c >= std::abs(a - b) && c <= a + b && (a + b + c) % 2 == 0;
}

void require_triangle(int a, int b, int c) {
    if (!triangle(a, b, c))
        throw AngularMomentumError(
            fmt::format("triangle rule violated for ({}/2, {}/2, {}/2)", a, b, c));
}

// Triangle coefficient (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)! on doubled arguments.
long double delta(int a, int b, int c) {
    return fact2(a + b - c) * fact2(a - b + c) * fact2(-a + b + c) / fact2(a + b + c + 2);
}

long double sign(int k) { return (k % 2 == 0) ? 1.0L : -1.0L; }

}  // namespace

double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M) {
    const int tj1 = twice(j1), tm1 = twice(m1), tj2 = twice(j2), tm2 = twice(m2);
    const int tJ = twice(J), tM = twice(M);
    require_triangle(tj1, tj2, tJ);
    auto check_m = [](int tj, int tm) {
        if (std::abs(tm) > tj || (tj + tm) % 2 != 0)
            throw AngularMomentumError(fmt::format("projection {}/2 invalid for j={}/2", tm, tj));
    };
    check_m(tj1, tm1);
    check_m(tj2, tm2);
    check_m(tJ, tM);
    if (tM != tm1 + tm2) return 0.0;

    const long double pre = std::sqrt(static_cast<long double>(tJ + 1) * delta(tj1, tj2, tJ) *
                                      fact2(tj1 + tm1) * fact2(tj1 - tm1) * fact2(tj2 + tm2) *
                                      fact2(tj2 - tm2) * fact2(tJ + tM) * fact2(tJ - tM));

    // k runs over doubled integers keeping every factorial argument >= 0.
    long double sum = 0.0L;
    const int kmin = std::max({0, tj2 - tJ - tm1, tj1 - tJ + tm2});
    const int kmax = std::min({tj1 + tj2 - tJ, tj1 - tm1, tj2 + tm2});
    for (int k = kmin; k <= kmax; k += 2) {
        const long double den = fact2(k) * fact2(tj1 + tj2 - tJ - k) * fact2(tj1 - tm1 - k) *
                                fact2(tj2 + tm2 - k) * fact2(tJ - tj2 + tm1 + k) *
                                fact2(tJ - tj1 - tm2 + k);
        sum += sign(k / 2) / den;
    }
    return static_cast<double>(pre * sum);
}

double wigner_6j(double j1, double j2, double j3, double j4, double j5, double j6) {
    const int a = twice(j1), b = twice(j2), c = twice(j3);
    const int d = twice(j4), e = twice(j5), f = twice(j6);
    require_triangle(a, b, c);
    require_triangle(a, e, f);
    require_triangle(d, b, f);
    require_triangle(d, e, c);

    const long double pre = std::sqrt(delta(a, b, c) * delta(a, e, f) * delta(d, b, f) * delta(d, e, c));
    const int s1 = a + b + c, s2 = a + e + f, s3 = d + b + f, s4 = d + e + c;
    const int p1 = a + b + d + e, p2 = b + c + e + f, p3 = c + a + f + d;
    const int tmin = std::max({s1, s2, s3, s4});
    const int tmax = std::min({p1, p2, p3});

    long double sum = 0.0L;
    for (int t = tmin; t <= tmax; t += 2) {
        const long double den = fact2(t - s1) * fact2(t - s2) * fact2(t - s3) * fact2(t - s4) *
                                fact2(p1 - t) * fact2(p2 - t) * fact2(p3 - t);
        sum += sign(t / 2) * fact2(t + 2) / den;
    }
    return static_cast<double>(pre * sum);
}

}  // namespace sgq::angular
