#pragma once

#include <cstdint>
#include <span>

#include "entrate/dist.hpp"

namespace entrate {

/*
 * Shannon entropy estimators on count data: plug-in, Miller-Madow, and the
 * polynomial-approximation estimator that is minimax-rate-optimal on large
 * alphabets. The polynomial estimator splits symbols by count: small counts
 * get an unbiased evaluation of the best polynomial approximation of
 * phi(p) = -p ln p rescaled to [0, c2 ln n / n]; large counts get the
 * bias-corrected plug-in term phi(N/n) + 1/(2n).
 */

struct PolyEstimatorParams {
    double c0 = 1.0;       // degree K = ceil(c0 * ln n)
    double c1 = 0.7;       // small-count regime: N <= c1 * ln n (ties small)
    double c2 = 1.4;       // approximation interval [0, c2 * ln n / n]
    double clamp_hi = -1;  // upper clamp; negative means "use ln(alphabet size)"
};

struct ConfidenceParams {
    double c3 = 20.0;         // deviation constant
    double c4 = 0.001;        // small-probability exponent
    double alpha = 0.001;     // concentration exponent
    double alpha_prime = 0.01;

    // Failure-probability exponent: deviation events fail with prob <= 2/n^beta.
    double beta() const { return c3 * c3 / (4.0 + 10.0 * c3); }
};

// N(N-1)...(N-j+1) / (n(n-1)...(n-j+1)): the unique unbiased estimator of
// p^j from a Binomial(n,p) count. Computed as a product of ratios in [0,1],
// so it cannot overflow for any n. Throws DegreeExceedsSamples if j > n.
double unbiased_monomial(std::uint64_t N, std::uint64_t n, int j);

// Polynomial-approximation entropy estimate in nats, clamped to [0, clamp_hi].
// Zero-count symbols contribute 0. Throws TooFewSamples if n < 2.
double estimate_entropy_poly(const Counts& counts, const PolyEstimatorParams& params = {});

// Miller-Madow: plug-in + (S_observed - 1)/(2n), clamped to [0, ln S].
// Throws EmptyCounts if n = 0.
double estimate_entropy_mm(const Counts& counts);

/*
 * Sparse cores: operate on the nonzero counts only, with the alphabet size
 * supplied separately for the clamp. The corpus pipeline and the per-state
 * slice loop use these to avoid materializing dense vectors per context.
 * The span must contain only strictly positive values summing to n.
 */
double entropy_plugin_sparse(std::span<const std::uint64_t> nonzero, std::uint64_t n);
double estimate_entropy_poly_sparse(std::span<const std::uint64_t> nonzero, std::uint64_t n,
                                    std::uint64_t alphabet, const PolyEstimatorParams& params = {});
double estimate_entropy_mm_sparse(std::span<const std::uint64_t> nonzero, std::uint64_t n,
                                  std::uint64_t alphabet);

} // namespace entrate
