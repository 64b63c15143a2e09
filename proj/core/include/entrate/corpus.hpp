#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "entrate/entropy_est.hpp"
#include "entrate/rate.hpp"

namespace entrate {

/*
 * Text pipeline: whitespace tokenization, k-gram context models, conditional
 * entropy in bits, subsampling curves, bootstrap error ranges, and the
 * perplexity conversion.
 */

struct TokenizeConfig {
    bool fold_case = false; // ASCII-only folding when enabled
};

struct TokenStream {
    std::vector<std::uint32_t> tokens;
    std::vector<std::string> vocab;                     // id -> token string
    std::unordered_map<std::string, std::uint32_t> ids; // token string -> id

    std::uint32_t vocab_size() const { return std::uint32_t(vocab.size()); }
};

// Splits on Unicode whitespace, ids assigned in first-appearance order.
// Throws InvalidEncoding on malformed UTF-8.
TokenStream tokenize(std::string_view text, const TokenizeConfig& config = {});

struct KGramModel {
    std::uint32_t k = 1;
    std::uint32_t vocab_size = 0;
    std::uint64_t n_k = 0; // k-gram instances = token count - (k-1)

    // Contexts in first-appearance order; per-context successor counts live
    // in entries[offsets[c] .. offsets[c+1]) sorted by token id.
    std::vector<std::vector<std::uint32_t>> context_tuples;
    std::vector<std::uint64_t> offsets;
    std::vector<std::pair<std::uint32_t, std::uint64_t>> entries; // (next id, count)
    std::vector<std::uint64_t> context_totals;

    std::uint64_t contexts() const { return context_tuples.size(); }
};

// Tallies context (tokens[t-k+1..t-1]) -> tokens[t] for every t >= k-1.
// k = 1 uses the single empty context. k is capped at 5 (memory budget).
KGramModel build_kgram(const TokenStream& stream, std::uint32_t k);

// sum over contexts of (n_ctx/n_k) * H_est(successor counts), in nats and in
// bits. Single-occurrence contexts contribute 0 under the poly estimator.
double conditional_entropy_k_nats(const KGramModel& model, SliceEstimator estimator,
                                  const PolyEstimatorParams& params = {});
double conditional_entropy_k(const KGramModel& model, SliceEstimator estimator,
                             const PolyEstimatorParams& params = {});

struct BootstrapSummary {
    double mean_bits = 0.0;
    double sd_bits = 0.0; // sample standard deviation over replicates
    double range_bits = 0.0;
    double min_bits = 0.0;
    double max_bits = 0.0;
    std::uint32_t replicates = 0;
};

struct CorpusReport {
    std::uint32_t k = 1;
    std::string estimator;
    double estimate_bits = 0.0;
    std::optional<BootstrapSummary> bootstrap;
    std::vector<std::pair<std::uint64_t, double>> curve; // (size, estimate_bits)
};

// Estimates on seeded uniform random subsets of the k-gram instances, one
// per requested size. Throws SizeExceedsCorpus when a size exceeds the
// available instance count.
CorpusReport subsample_curve(const TokenStream& stream, std::uint32_t k,
                             const std::vector<std::uint64_t>& sizes, SliceEstimator estimator,
                             std::uint64_t seed, const PolyEstimatorParams& params = {},
                             unsigned threads = 1);

// B instance-level resamples (n_k draws with replacement each); reports
// mean, sample sd, and range of the replicate estimates.
CorpusReport bootstrap_estimate(const TokenStream& stream, std::uint32_t k, std::uint32_t B,
                                SliceEstimator estimator, std::uint64_t seed,
                                const PolyEstimatorParams& params = {}, unsigned threads = 1);

double perplexity_from_bits(double cross_entropy_bits);

// JSON record matching CorpusReport; CSV (`size,estimate_bits`) for curves.
std::string corpus_report_to_json(const CorpusReport& report);
std::string curve_to_csv(const CorpusReport& report);

} // namespace entrate
