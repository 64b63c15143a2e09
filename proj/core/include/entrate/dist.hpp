#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace entrate {

/*
 * Count histograms and probability vectors over a dense symbol alphabet
 * [0, S), plus the plug-in Shannon entropy. Everything downstream
 * (estimators, chain analytics, the corpus pipeline) is built on these.
 * All entropies are in nats; unit conversion is a presentation concern.
 */

struct Counts {
    std::vector<std::uint64_t> counts; // indexed by symbol id
    std::uint64_t n = 0;               // total = sum of entries

    std::size_t size() const { return counts.size(); }
};

struct ProbVector {
    std::vector<double> probs;

    std::size_t size() const { return probs.size(); }
};

// Consecutive-pair occurrence matrix. Row i holds the successor counts of
// state i; row sums equal the per-state visit counts over positions 0..n-1.
struct PairCounts {
    std::uint32_t S = 0;
    std::vector<std::uint64_t> cells; // S*S row-major
    std::uint64_t n = 0;              // number of pairs

    std::uint64_t& at(std::uint32_t i, std::uint32_t j) { return cells[std::size_t(i) * S + j]; }
    std::uint64_t at(std::uint32_t i, std::uint32_t j) const { return cells[std::size_t(i) * S + j]; }
};

// Tallies symbol ids into a Counts of size S. Throws OutOfRangeSymbol.
Counts counts_from_samples(std::span<const std::uint32_t> samples, std::uint32_t S);

// counts[i]/n. Throws EmptyCounts when n = 0.
ProbVector normalize(const Counts& counts);

// Validates the ProbVector invariants (entries ≥ 0, sum within 1e-12 of 1).
void check_prob_vector(const ProbVector& p);

// Σ p_i ln(1/p_i) in nats, with 0·ln(1/0) = 0. Result is in [0, ln S].
double entropy_plugin(const ProbVector& p);
double entropy_plugin(const Counts& counts);

// Compensated accumulator: keeps absolute summation error near one ulp of the
// total regardless of term count. Entropy identities downstream are checked
// to 1e-10, so naive left-to-right accumulation over ~1e6 terms is not enough.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

} // namespace entrate
