#include "pcstage/special.hpp"

#include <cmath>
#include <limits>

#include "pcstage/error.hpp"

namespace pcstage {
namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b); valid
// (fast-converging) for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int max_iter = 10000;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw Error(Errc::NumericalFailure, "incomplete beta continued fraction did not converge");
}

// x^a (1-x)^b / (a B(a, b)) computed in log space.
double beta_prefactor(double a, double b, double x, double x_complement) {
    // log1p(-x) is exact for small x; near x = 1 the supplied complement is.
    const double log_complement = x > 0.5 ? std::log(x_complement) : std::log1p(-x);
    const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    return std::exp(a * std::log(x) + b * log_complement - log_beta);
}

} // namespace

double incomplete_beta(double a, double b, double x, double x_complement) {
    if (!(a > 0.0) || !(b > 0.0)) throw Error(Errc::InvalidArgument, "incomplete beta needs a, b > 0");
    if (std::isnan(x) || x < 0.0 || x > 1.0) throw Error(Errc::InvalidArgument, "incomplete beta needs x in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x_complement == 0.0) return 1.0;
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return beta_prefactor(a, b, x, x_complement) * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - beta_prefactor(b, a, x_complement, x) * beta_continued_fraction(b, a, x_complement) / b;
}

double incomplete_beta(double a, double b, double x) { return incomplete_beta(a, b, x, 1.0 - x); }

double student_t_two_sided(double t, double df) {
    if (!(df > 0.0)) throw Error(Errc::InvalidArgument, "t distribution needs df > 0");
    if (std::isnan(t)) throw Error(Errc::InvalidArgument, "t statistic is NaN");
    if (std::isinf(t)) return 0.0;
    const double t2 = t * t;
    const double x = df / (df + t2);
    const double xc = t2 / (df + t2);
    // incomplete_beta picks the stable side itself; flipping here would
    // cancel when b = 1/2 puts almost all mass near x = 1.
    return incomplete_beta(df / 2.0, 0.5, x, xc);
}

double f_upper_tail(double f, double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw Error(Errc::InvalidArgument, "F distribution needs positive df");
    if (std::isnan(f)) throw Error(Errc::InvalidArgument, "F statistic is NaN");
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    const double denom = d2 + d1 * f;
    const double x = d2 / denom;
    const double xc = d1 * f / denom;
    return incomplete_beta(d2 / 2.0, d1 / 2.0, x, xc);
}

} // namespace pcstage
