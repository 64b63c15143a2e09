#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entrate/dist.hpp"
#include "entrate/entropy_est.hpp"
#include "entrate/markov.hpp"

namespace entrate {

/*
 * Sample-path generation, the per-state conditional decomposition, pair
 * counting, and the Bernstein-type deviation bound used by the certificate
 * tests.
 */

struct SamplePath {
    std::uint32_t S = 0;
    std::vector<std::uint32_t> states; // X_0 .. X_n, length n+1

    std::uint64_t n() const { return states.empty() ? 0 : states.size() - 1; }
};

struct ConditionalSlices {
    std::vector<std::uint64_t> n_i;                 // visits over positions 0..n-1
    std::vector<std::vector<std::uint32_t>> slices; // successors of each visit, in order
    std::vector<double> pi_hat;                     // n_i / n
};

// X_0 ~ pi, thereafter X_{t+1} ~ T_{X_t}, by inverse-CDF lookup on
// precomputed row cumulative sums. Deterministic given seed.
SamplePath sample_path(const TransitionMatrix& T, const StationaryDist& pi, std::uint64_t n,
                       std::uint64_t seed);

// Same path law built the row-sampling way: each row i owns an i.i.d. stream
// of draws from T_i, and step t consumes the next unconsumed draw of row X_t.
SamplePath sample_path_rowwise(const TransitionMatrix& T, const StationaryDist& pi,
                               std::uint64_t n, std::uint64_t seed);

// X^(i) = successors of the visits to i among positions 0..n-1; pi_hat over
// the same positions so that n_i = |X^(i)| exactly.
ConditionalSlices decompose(const SamplePath& path);

// Dense consecutive-pair counts; entry (i,j) counts t with (X_t, X_{t+1}) = (i,j).
PairCounts pair_counts(const SamplePath& path);

// c3 * max{ ln n/(n gamma), sqrt(pi_i ln n/(n gamma)) }: the one-state
// deviation radius for |pi_hat_i - pi_i| that fails with probability at most
// deviation_failure_prob.
double deviation_bound(double pi_i, std::uint64_t n, double gamma, const ConfidenceParams& params);

// 2 / n^beta with beta = c3^2/(4 + 10 c3).
double deviation_failure_prob(std::uint64_t n, const ConfidenceParams& params);

// Plain text, whitespace-separated ids. The reader validates every id
// against S and requires at least two symbols.
void write_path_file(const std::string& file, const SamplePath& path);
SamplePath read_path_file(const std::string& file, std::uint32_t S);

} // namespace entrate
