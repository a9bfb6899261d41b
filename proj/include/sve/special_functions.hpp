#pragma once

namespace sve {

// Gamma function for x > 0 (Lanczos approximation, >= 1e-12 relative
// accuracy). Throws std::domain_error for x <= 0.
double gamma_fn(double x);

// log(Gamma(x)) for x > 0.
double log_gamma(double x);

// Gamma function extended to negative non-integer arguments via the
// reflection formula. Throws std::domain_error at poles (x = 0, -1, ...).
double gamma_fn_signed(double x);

// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a),
// a > 0, x >= 0. Series for x < a + 1, continued fraction otherwise.
double lower_incomplete_gamma_regularized(double a, double x);

// Unregularized lower incomplete gamma gamma(a, x).
double lower_incomplete_gamma(double a, double x);

// Standard normal CDF via erfc.
double normal_cdf(double x);

struct Hyp2F1Result {
    double value = 0.0;
    int terms_used = 0;
    // Evaluation branch actually taken: which representation produced the
    // value (direct series, the linear transformation in 1 - x, or the
    // Gauss closed form at x = 1).
    enum class Branch { Series, Transformed, GaussClosedForm } branch = Branch::Series;
};

// Gauss hypergeometric function 2F1(a, b; c; x) on x in [0, 1].
// Power series for x <= 0.7, a linear transformation in 1 - x for
// x in (0.7, 1) (with a direct-series fallback when the transformation
// degenerates, i.e. c - a - b close to an integer), and the Gauss closed
// form at x = 1 (requires c - a - b > 0 there).
Hyp2F1Result hyp2f1_detailed(double a, double b, double c, double x, double tol = 1e-12);
double hyp2f1(double a, double b, double c, double x, double tol = 1e-12);

namespace detail {

// Direct power series evaluation; valid for |x| < 1 (slow near 1).
// Exposed so tests can cross-check the two representations on (0.6, 0.8).
double hyp2f1_series(double a, double b, double c, double x, double tol,
                     int max_terms, int* terms_used = nullptr);

// Evaluation through the connection formula in powers of 1 - x; valid for
// x in (0, 1) when c - a - b is not an integer.
double hyp2f1_transformed(double a, double b, double c, double x, double tol,
                          int* terms_used = nullptr);

}  // namespace detail
}  // namespace sve
