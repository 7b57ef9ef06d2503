#pragma once

namespace gevk {

/// ln Gamma(x) for x > 0 (Lanczos, g = 607/128). Throws std::domain_error for x <= 0.
double log_gamma(double x);

/// ln B(a, b)
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz)
/// evaluated on whichever side of the mean converges faster.
double reg_inc_beta(double a, double b, double x);

/// x in [0, 1] with reg_inc_beta(a, b, x) = q. Bracketed bisection with Newton
/// steps; throws std::runtime_error if the iteration cap is hit.
double beta_inv(double a, double b, double q);

/// Phi^-1(p) for p in (0, 1).
double normal_quantile(double p);

/// P(T > t) for Student's t with `df` degrees of freedom.
double student_t_upper_tail(double t, double df);

/// t with P(T > t) = p.
double student_t_quantile_upper(double p, double df);

}  // namespace gevk
