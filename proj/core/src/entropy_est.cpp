#include "entrate/entropy_est.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "entrate/errors.hpp"
#include "entrate/poly_approx.hpp"

namespace entrate {

double unbiased_monomial(std::uint64_t N, std::uint64_t n, int j) {
    if (j < 1) throw InvalidArgument("monomial power must be >= 1");
    if (static_cast<std::uint64_t>(j) > n) {
        throw DegreeExceedsSamples("power " + std::to_string(j) + " exceeds sample size " + std::to_string(n));
    }
    if (N > n) throw InvalidArgument("count exceeds sample size");
    if (N < static_cast<std::uint64_t>(j)) return 0.0; // falling factorial vanishes
    double r = 1.0;
    for (int t = 0; t < j; ++t) {
        r *= static_cast<double>(N - std::uint64_t(t)) / static_cast<double>(n - std::uint64_t(t));
    }
    return r;
}

namespace {

double clamp_entropy(double value, double hi) {
    if (value < 0.0) return 0.0;
    return value < hi ? value : hi;
}

std::vector<std::uint64_t> collect_nonzero(const Counts& counts) {
    std::vector<std::uint64_t> nz;
    nz.reserve(counts.size());
    for (std::uint64_t c : counts.counts) {
        if (c > 0) nz.push_back(c);
    }
    return nz;
}

} // namespace

double entropy_plugin_sparse(std::span<const std::uint64_t> nonzero, std::uint64_t n) {
    if (n == 0) throw EmptyCounts("entropy of empty counts");
    const double nd = static_cast<double>(n);
    const double logn = std::log(nd);
    KahanSum h;
    for (std::uint64_t c : nonzero) {
        const double x = static_cast<double>(c);
        h.add(x * (logn - std::log(x)));
    }
    const double val = h.value() / nd;
    return val < 0.0 ? 0.0 : val;
}

double estimate_entropy_poly_sparse(std::span<const std::uint64_t> nonzero, std::uint64_t n,
                                    std::uint64_t alphabet, const PolyEstimatorParams& params) {
    if (n < 2) throw TooFewSamples("polynomial entropy estimator needs n >= 2");
    const double nd = static_cast<double>(n);
    const double logn = std::log(nd);
    const int K = static_cast<int>(std::ceil(params.c0 * logn));
    const double threshold = params.c1 * logn;
    double delta = params.c2 * logn / nd;
    if (delta > 1.0) delta = 1.0; // approximation interval never exceeds the domain
    const double log_inv_delta = -std::log(delta);
    const PolyCoeffs& pc = poly_coeffs_cached(std::max(K, 1));

    KahanSum h;
    for (std::uint64_t c : nonzero) {
        const double N = static_cast<double>(c);
        if (N <= threshold) {
            // Unbiased estimate of the rescaled approximation
            //   sum_k a_k delta^{1-k} p^k + p ln(1/delta)
            // at p via falling factorials. rho_k folds delta into the product
            // so every intermediate stays bounded (each factor < c1/c2 <= 1).
            double rho = 1.0; // rho_0
            KahanSum s;
            s.add(pc.monomial[0]);
            const int jmax = std::min<int>(pc.degree, static_cast<int>(c));
            for (int j = 1; j <= jmax; ++j) {
                rho *= (N - double(j - 1)) / ((nd - double(j - 1)) * delta);
                s.add(pc.monomial[std::size_t(j)] * rho);
            }
            h.add(delta * s.value() + (N / nd) * log_inv_delta);
        } else {
            h.add(N / nd * (logn - std::log(N)) + 0.5 / nd);
        }
    }
    const double hi = params.clamp_hi >= 0.0 ? params.clamp_hi
                                             : std::log(static_cast<double>(std::max<std::uint64_t>(alphabet, 1)));
    return clamp_entropy(h.value(), hi);
}

double estimate_entropy_mm_sparse(std::span<const std::uint64_t> nonzero, std::uint64_t n,
                                  std::uint64_t alphabet) {
    if (n == 0) throw EmptyCounts("Miller-Madow estimator needs n >= 1");
    const double plug = entropy_plugin_sparse(nonzero, n);
    const double corrected =
        plug + (static_cast<double>(nonzero.size()) - 1.0) / (2.0 * static_cast<double>(n));
    const double hi = std::log(static_cast<double>(std::max<std::uint64_t>(alphabet, 1)));
    return clamp_entropy(corrected, hi);
}

double estimate_entropy_poly(const Counts& counts, const PolyEstimatorParams& params) {
    const std::vector<std::uint64_t> nz = collect_nonzero(counts);
    return estimate_entropy_poly_sparse(nz, counts.n, counts.size(), params);
}

double estimate_entropy_mm(const Counts& counts) {
    const std::vector<std::uint64_t> nz = collect_nonzero(counts);
    return estimate_entropy_mm_sparse(nz, counts.n, counts.size());
}

} // namespace entrate
