#include "entrate/rate.hpp"

#include <algorithm>
#include <cmath>

#include "entrate/errors.hpp"
#include "entrate/suffix.hpp"

namespace entrate {

namespace {

const char* estimator_name(SliceEstimator e) {
    switch (e) {
        case SliceEstimator::Plugin: return "emp";
        case SliceEstimator::Poly: return "opt";
        case SliceEstimator::Mm: return "mm";
    }
    return "?";
}

// Shared conditional-form core. Slice counts are gathered through a reused
// size-S scratch vector so no dense S x S table is ever materialized.
RateEstimate conditional_core(const SamplePath& path, SliceEstimator estimator,
                              const PolyEstimatorParams& params) {
    const std::uint32_t S = path.S;
    ConditionalSlices slices = decompose(path);

    RateEstimate out;
    out.estimator = estimator_name(estimator);
    out.per_state.assign(S, 0.0);

    std::vector<std::uint64_t> scratch(S, 0);
    std::vector<std::uint64_t> nonzero;
    std::vector<std::uint32_t> touched;
    KahanSum total;

    for (std::uint32_t i = 0; i < S; ++i) {
        const auto& slice = slices.slices[i];
        if (slice.empty()) {
            ++out.never_visited;
            continue;
        }
        touched.clear();
        for (std::uint32_t sym : slice) {
            if (scratch[sym]++ == 0) touched.push_back(sym);
        }
        std::sort(touched.begin(), touched.end());
        nonzero.clear();
        for (std::uint32_t sym : touched) {
            nonzero.push_back(scratch[sym]);
            scratch[sym] = 0;
        }

        const std::uint64_t ni = slice.size();
        double h = 0.0;
        switch (estimator) {
            case SliceEstimator::Plugin:
                h = entropy_plugin_sparse(nonzero, ni);
                break;
            case SliceEstimator::Poly:
                h = ni < 2 ? 0.0 : estimate_entropy_poly_sparse(nonzero, ni, S, params);
                break;
            case SliceEstimator::Mm:
                h = estimate_entropy_mm_sparse(nonzero, ni, S);
                break;
        }
        double contribution = slices.pi_hat[i] * h;
        out.per_state[i] = contribution;
        total.add(contribution);
    }
    out.value = std::max(0.0, total.value());
    return out;
}

} // namespace

RateEstimate empirical_rate(const SamplePath& path) {
    RateEstimate est = conditional_core(path, SliceEstimator::Plugin, {});

    // Independent computation via H(pair marginal) - H(first marginal).
    ConditionalSlices slices = decompose(path);
    const std::uint32_t S = path.S;
    const double n = double(path.n());

    std::vector<std::uint64_t> scratch(S, 0);
    std::vector<std::uint32_t> touched;
    KahanSum pair_h, marginal_h;
    for (std::uint32_t i = 0; i < S; ++i) {
        const auto& slice = slices.slices[i];
        if (slice.empty()) continue;
        touched.clear();
        for (std::uint32_t sym : slice) {
            if (scratch[sym]++ == 0) touched.push_back(sym);
        }
        for (std::uint32_t sym : touched) {
            double p = double(scratch[sym]) / n;
            pair_h.add(-p * std::log(p));
            scratch[sym] = 0;
        }
        double q = slices.pi_hat[i];
        marginal_h.add(-q * std::log(q));
    }

    double diff_form = pair_h.value() - marginal_h.value();
    if (std::abs(diff_form - est.value) > 1e-10) {
        throw Error("plug-in rate identity violated: conditional " + std::to_string(est.value) +
                    " vs pair " + std::to_string(diff_form));
    }
    return est;
}

RateEstimate conditional_rate(const SamplePath& path, SliceEstimator estimator,
                              const PolyEstimatorParams& params) {
    return conditional_core(path, estimator, params);
}

MatchLengths match_lengths(const SamplePath& path, const MatchWindow& window) {
    if (path.n() < 2) throw PathTooShort("match lengths need at least two transitions");
    const std::uint64_t len = path.states.size();
    if (window.first > window.last || window.last >= len) {
        throw InvalidArgument("match window out of range");
    }
    if (window.last - window.first + 1 < 2) {
        throw PathTooShort("match window must contain at least two positions");
    }

    std::vector<std::uint32_t> lpf = longest_previous_factor(path.states);
    MatchLengths out;
    out.window = window;
    out.lengths.reserve(window.last - window.first + 1);
    for (std::uint64_t i = window.first; i <= window.last; ++i) {
        out.lengths.push_back(std::uint64_t(lpf[i]) + 1);
    }
    return out;
}

RateEstimate lz_rate(const SamplePath& path) {
    const std::uint64_t n = path.n();
    if (n < 16) throw PathTooShort("lz estimator needs n >= 16");
    MatchLengths ml = match_lengths(path, MatchWindow::centered(n));

    const double log_n = std::log(double(n));
    KahanSum acc;
    for (std::uint64_t L : ml.lengths) acc.add(double(L) / log_n);
    double mean_norm = acc.value() / double(ml.lengths.size());

    RateEstimate out;
    out.estimator = "lz";
    out.value = std::clamp(1.0 / mean_norm, 0.0, std::log(double(path.S)));
    return out;
}

double log_loss(const SamplePath& path, const TransitionMatrix& T) {
    if (path.S != T.S) throw InvalidArgument("path alphabet does not match kernel");
    const std::uint64_t n = path.n();
    if (n < 1) throw InvalidArgument("log loss needs at least one transition");
    KahanSum acc;
    for (std::uint64_t t = 0; t < n; ++t) {
        double p = T.at(path.states[t], path.states[t + 1]);
        if (p <= 0.0) {
            throw ZeroProbabilityTransition(
                "observed transition " + std::to_string(path.states[t]) + "->" +
                std::to_string(path.states[t + 1]) + " has zero probability");
        }
        acc.add(-std::log(p));
    }
    return acc.value() / double(n);
}

double empirical_bias_upper_bound(std::uint32_t S, std::uint64_t n) {
    if (S < 1 || n < 1) throw InvalidArgument("bias bound needs S, n >= 1");
    const double s2 = double(S) * double(S);
    const double nd = double(n);
    return (2.0 * s2 / nd) * std::log1p(nd / s2) + (s2 + 2.0) * M_LN2 / nd;
}

double empirical_bias_lower_bound(std::uint32_t S, std::uint64_t n) {
    if (S < 1 || n < 1) throw InvalidArgument("bias bound needs S, n >= 1");
    const double s2 = double(S) * double(S);
    double v = std::log(s2 / (double(n) + double(S) - 1.0));
    return std::max(0.0, v);
}

} // namespace entrate
