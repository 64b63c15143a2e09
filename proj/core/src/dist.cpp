#include "entrate/dist.hpp"

#include <cmath>
#include <string>

#include "entrate/errors.hpp"

namespace entrate {

Counts counts_from_samples(std::span<const std::uint32_t> samples, std::uint32_t S) {
    Counts out;
    out.counts.assign(S, 0);
    for (std::uint32_t id : samples) {
        if (id >= S) {
            throw OutOfRangeSymbol("symbol id " + std::to_string(id) +
                                   " out of range for alphabet size " + std::to_string(S));
        }
        ++out.counts[id];
    }
    out.n = samples.size();
    return out;
}

ProbVector normalize(const Counts& counts) {
    if (counts.n == 0) throw EmptyCounts("cannot normalize counts with total 0");
    ProbVector p;
    p.probs.resize(counts.size());
    const double inv = 1.0 / static_cast<double>(counts.n);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        p.probs[i] = static_cast<double>(counts.counts[i]) * inv;
    }
    return p;
}

void check_prob_vector(const ProbVector& p) {
    KahanSum sum;
    for (double v : p.probs) {
        if (!(v >= 0.0) || v > 1.0) {
            throw InvalidArgument("probability entry outside [0,1]");
        }
        sum.add(v);
    }
    if (std::abs(sum.value() - 1.0) > 1e-12) {
        throw InvalidArgument("probabilities sum to " + std::to_string(sum.value()) + ", not 1");
    }
}

double entropy_plugin(const ProbVector& p) {
    KahanSum h;
    for (double v : p.probs) {
        if (v > 0.0) h.add(-v * std::log(v));
    }
    // Roundoff can leave a tiny negative total for near-point-mass inputs.
    return h.value() < 0.0 ? 0.0 : h.value();
}

double entropy_plugin(const Counts& counts) {
    if (counts.n == 0) throw EmptyCounts("entropy of empty counts");
    const double n = static_cast<double>(counts.n);
    const double logn = std::log(n);
    KahanSum h;
    for (std::uint64_t c : counts.counts) {
        if (c > 0) {
            const double x = static_cast<double>(c);
            h.add(x * (logn - std::log(x)));
        }
    }
    const double val = h.value() / n;
    return val < 0.0 ? 0.0 : val;
}

} // namespace entrate
