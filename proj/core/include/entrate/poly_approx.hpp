#pragma once

#include <vector>

namespace entrate {

/*
 * Minimax (uniform-norm) polynomial approximation of phi(x) = -x ln x on
 * [0,1], computed by Remez exchange. The approximation drives the
 * small-count branch of the polynomial entropy estimator.
 *
 * Coefficients are kept in two bases:
 *  - shifted-Chebyshev (c_0..c_K over T_j(2x-1)): numerically stable, used
 *    for evaluation and for the equioscillation certificate;
 *  - monomial (a_0..a_K): required by the unbiased falling-factorial
 *    evaluation in the estimator. Conversion is done in extended precision;
 *    beyond degree ~24 the monomial basis itself loses accuracy, which is
 *    why certificates never use it.
 */

struct PolyCoeffs {
    int degree = 0;
    std::vector<double> monomial;    // a_0..a_K on [0,1]
    std::vector<double> chebyshev;   // c_0..c_K, basis T_j(2x-1)
    double sup_error = 0.0;          // achieved equioscillation error
    std::vector<double> alternation; // K+2 reference abscissae, ascending
};

// phi(x) = -x ln x with phi(0) = 0.
double phi_neg_xlogx(double x);

// Stable evaluation of the stored polynomial at x in [0,1] (Clenshaw).
double poly_eval(const PolyCoeffs& pc, double x);

// Best degree-K approximation via continuous Remez exchange (budget 200
// iterations, exchange tolerance 1e-12). Falls back to the discrete variant
// on non-convergence; throws ConvergenceFailure only if both fail.
PolyCoeffs best_poly_coeffs(int K);

// Discrete minimax on 4096 Chebyshev nodes; the fallback path, callable
// directly so it can be validated against the continuous result.
PolyCoeffs best_poly_coeffs_discrete(int K);

// Populate-once concurrent cache; reference stays valid for program lifetime.
const PolyCoeffs& poly_coeffs_cached(int K);

// Highest degree the module accepts (the estimator needs K = ceil(c0 ln n)).
inline constexpr int kMaxPolyDegree = 128;

} // namespace entrate
