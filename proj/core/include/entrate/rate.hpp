#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entrate/entropy_est.hpp"
#include "entrate/simulate.hpp"

namespace entrate {

/*
 * Entropy-rate estimators from a single sample path, plus the log-loss and
 * bias-bound companions used as oracles in tests and overlays.
 */

struct RateEstimate {
    double value = 0.0; // nats
    std::string estimator;
    std::vector<double> per_state; // contribution pi_hat_i * H_i (empty for lz)
    std::uint64_t never_visited = 0;
};

enum class SliceEstimator { Plugin, Poly, Mm };

// Plug-in estimate computed as sum_i pi_hat_i H(X^(i)) and independently as
// H(pair marginal) - H(first marginal); the two must agree within 1e-10.
RateEstimate empirical_rate(const SamplePath& path);

// sum_i pi_hat_i H_est(X^(i)) with the chosen per-slice entropy estimator.
// Poly slices with n_i < 2 contribute 0 (estimator precondition).
// conditional_rate(Plugin) reproduces empirical_rate bit for bit.
RateEstimate conditional_rate(const SamplePath& path, SliceEstimator estimator,
                              const PolyEstimatorParams& params = {});

struct MatchWindow {
    std::uint64_t first = 0;
    std::uint64_t last = 0; // inclusive

    // i in {ceil(n/4) .. ceil(3n/4)}: every evaluated position keeps at
    // least n/4 of history behind it and lookahead ahead of it.
    static MatchWindow centered(std::uint64_t n) {
        return {(n + 3) / 4, (3 * n + 3) / 4};
    }
};

struct MatchLengths {
    std::vector<std::uint64_t> lengths; // L_i for i = window.first .. window.last
    MatchWindow window;
};

// L_i = 1 + length of the longest block starting at i that also occurs
// starting at some j < i (the earlier copy may overlap i).
MatchLengths match_lengths(const SamplePath& path, const MatchWindow& window);

// H_lz = ( mean_i L_i / ln n )^{-1} over the centered window, clamped to
// [0, ln S]. Long matches mean low entropy, hence the reciprocal.
RateEstimate lz_rate(const SamplePath& path);

// (1/n) sum_t ln(1/T[X_t][X_{t+1}]). Throws ZeroProbabilityTransition if the
// path uses a transition the kernel forbids.
double log_loss(const SamplePath& path, const TransitionMatrix& T);

// Uniform upper bound on the plug-in bias H - E[H_emp]:
// (2 S^2/n) ln(n/S^2 + 1) + (S^2 + 2) ln 2 / n.
double empirical_bias_upper_bound(std::uint32_t S, std::uint64_t n);

// Companion lower bound max(0, ln(S^2/(n + S - 1))).
double empirical_bias_lower_bound(std::uint32_t S, std::uint64_t n);

} // namespace entrate
