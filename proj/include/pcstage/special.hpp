#pragma once

namespace pcstage {

/// Regularized incomplete beta I_x(a, b). `x_complement` must equal 1 - x;
/// passing it separately avoids cancellation when x is close to 1.
double incomplete_beta(double a, double b, double x, double x_complement);
double incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with `df`
/// degrees of freedom (df may be fractional).
double student_t_two_sided(double t, double df);

/// Upper tail P(F >= f) of the F distribution with (d1, d2) degrees of freedom.
double f_upper_tail(double f, double d1, double d2);

} // namespace pcstage
