#include "entrate/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "entrate/errors.hpp"
#include "entrate/rng.hpp"
#include "json.hpp"
#include "parallel.hpp"

namespace entrate {

namespace {

constexpr std::uint64_t kCurveStream = 0x63757276ULL;
constexpr std::uint64_t kBootStream = 0x626f6f74ULL;

bool is_unicode_space(std::uint32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
        case 0x20: case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Decodes one code point at byte offset i, advancing it. Rejects overlong
// forms, surrogates, and values beyond U+10FFFF.
std::uint32_t decode_utf8(std::string_view text, std::size_t& i) {
    auto cont = [&](std::size_t off) -> std::uint32_t {
        if (i + off >= text.size()) throw InvalidEncoding("truncated UTF-8 sequence");
        std::uint8_t b = std::uint8_t(text[i + off]);
        if ((b & 0xC0) != 0x80) throw InvalidEncoding("bad UTF-8 continuation byte");
        return b & 0x3F;
    };
    std::uint8_t b0 = std::uint8_t(text[i]);
    if (b0 < 0x80) {
        i += 1;
        return b0;
    }
    if ((b0 & 0xE0) == 0xC0) {
        std::uint32_t cp = (std::uint32_t(b0 & 0x1F) << 6) | cont(1);
        if (cp < 0x80) throw InvalidEncoding("overlong UTF-8 sequence");
        i += 2;
        return cp;
    }
    if ((b0 & 0xF0) == 0xE0) {
        std::uint32_t cp = (std::uint32_t(b0 & 0x0F) << 12) | (cont(1) << 6) | cont(2);
        if (cp < 0x800) throw InvalidEncoding("overlong UTF-8 sequence");
        if (cp >= 0xD800 && cp <= 0xDFFF) throw InvalidEncoding("surrogate in UTF-8");
        i += 3;
        return cp;
    }
    if ((b0 & 0xF8) == 0xF0) {
        std::uint32_t cp =
            (std::uint32_t(b0 & 0x07) << 18) | (cont(1) << 12) | (cont(2) << 6) | cont(3);
        if (cp < 0x10000 || cp > 0x10FFFF) throw InvalidEncoding("invalid UTF-8 code point");
        i += 4;
        return cp;
    }
    throw InvalidEncoding("invalid UTF-8 lead byte");
}

const char* corpus_estimator_name(SliceEstimator e) {
    switch (e) {
        case SliceEstimator::Plugin: return "plugin";
        case SliceEstimator::Poly: return "poly";
        case SliceEstimator::Mm: return "mm";
    }
    return "?";
}

// Conditional entropy in nats from successor counts aligned with
// model.entries; `counts` may be a resampled or subsampled replacement for
// the model's own tallies.
double eval_nats(const KGramModel& model, std::span<const std::uint64_t> counts,
                 SliceEstimator estimator, const PolyEstimatorParams& params) {
    std::uint64_t total = 0;
    for (std::uint64_t c : counts) total += c;
    if (total < 2) throw EmptyModel("need at least two k-gram instances");

    KahanSum acc;
    std::vector<std::uint64_t> nonzero;
    for (std::uint64_t ctx = 0; ctx < model.contexts(); ++ctx) {
        nonzero.clear();
        std::uint64_t n_ctx = 0;
        for (std::uint64_t e = model.offsets[ctx]; e < model.offsets[ctx + 1]; ++e) {
            if (counts[e] > 0) {
                nonzero.push_back(counts[e]);
                n_ctx += counts[e];
            }
        }
        if (n_ctx == 0) continue;
        double h = 0.0;
        switch (estimator) {
            case SliceEstimator::Plugin:
                h = entropy_plugin_sparse(nonzero, n_ctx);
                break;
            case SliceEstimator::Poly:
                h = n_ctx < 2 ? 0.0
                              : estimate_entropy_poly_sparse(nonzero, n_ctx, model.vocab_size,
                                                             params);
                break;
            case SliceEstimator::Mm:
                h = estimate_entropy_mm_sparse(nonzero, n_ctx, model.vocab_size);
                break;
        }
        acc.add(double(n_ctx) / double(total) * h);
    }
    return std::max(0.0, acc.value());
}

std::vector<std::uint64_t> model_counts(const KGramModel& model) {
    std::vector<std::uint64_t> counts;
    counts.reserve(model.entries.size());
    for (const auto& [next, count] : model.entries) counts.push_back(count);
    return counts;
}

// Inclusive cumulative instance counts per entry cell, so instance index
// idx in [0, n_k) maps to the first cell whose cumulative exceeds idx.
std::vector<std::uint64_t> instance_cumulative(const KGramModel& model) {
    std::vector<std::uint64_t> cum;
    cum.reserve(model.entries.size());
    std::uint64_t total = 0;
    for (const auto& [next, count] : model.entries) {
        total += count;
        cum.push_back(total);
    }
    return cum;
}

std::size_t locate_cell(const std::vector<std::uint64_t>& cum, std::uint64_t idx) {
    return std::size_t(std::upper_bound(cum.begin(), cum.end(), idx) - cum.begin());
}

} // namespace

TokenStream tokenize(std::string_view text, const TokenizeConfig& config) {
    TokenStream stream;
    std::string current;
    auto flush = [&]() {
        if (current.empty()) return;
        auto [it, inserted] = stream.ids.try_emplace(current, stream.vocab_size());
        if (inserted) stream.vocab.push_back(current);
        stream.tokens.push_back(it->second);
        current.clear();
    };

    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t start = i;
        std::uint32_t cp = decode_utf8(text, i);
        if (is_unicode_space(cp)) {
            flush();
            continue;
        }
        if (config.fold_case && cp >= 'A' && cp <= 'Z') {
            current.push_back(char(cp - 'A' + 'a'));
        } else {
            current.append(text.substr(start, i - start));
        }
    }
    flush();
    return stream;
}

KGramModel build_kgram(const TokenStream& stream, std::uint32_t k) {
    if (k < 1 || k > 5) throw InvalidArgument("k must lie in [1,5]");
    if (stream.tokens.size() < k) {
        throw StreamTooShort("stream holds " + std::to_string(stream.tokens.size()) +
                             " tokens, need at least " + std::to_string(k));
    }

    KGramModel model;
    model.k = k;
    model.vocab_size = stream.vocab_size();
    model.n_k = stream.tokens.size() - (k - 1);

    std::unordered_map<std::string, std::uint32_t> ctx_ids;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> instances; // (context, next)
    instances.reserve(model.n_k);

    std::string key;
    for (std::size_t t = k - 1; t < stream.tokens.size(); ++t) {
        key.clear();
        for (std::size_t u = t - (k - 1); u < t; ++u) {
            std::uint32_t id = stream.tokens[u];
            key.push_back(char(id & 0xFF));
            key.push_back(char((id >> 8) & 0xFF));
            key.push_back(char((id >> 16) & 0xFF));
            key.push_back(char((id >> 24) & 0xFF));
        }
        auto [it, inserted] = ctx_ids.try_emplace(key, std::uint32_t(model.context_tuples.size()));
        if (inserted) {
            model.context_tuples.emplace_back(stream.tokens.begin() + (t - (k - 1)),
                                              stream.tokens.begin() + t);
        }
        instances.emplace_back(it->second, stream.tokens[t]);
    }

    std::sort(instances.begin(), instances.end());
    model.offsets.assign(model.contexts() + 1, 0);
    model.context_totals.assign(model.contexts(), 0);
    for (std::size_t p = 0; p < instances.size();) {
        std::size_t q = p;
        while (q < instances.size() && instances[q] == instances[p]) ++q;
        model.entries.emplace_back(instances[p].second, std::uint64_t(q - p));
        model.context_totals[instances[p].first] += q - p;
        model.offsets[instances[p].first + 1] = model.entries.size();
        p = q;
    }
    for (std::size_t c = 1; c <= model.contexts(); ++c) {
        model.offsets[c] = std::max(model.offsets[c], model.offsets[c - 1]);
    }
    return model;
}

double conditional_entropy_k_nats(const KGramModel& model, SliceEstimator estimator,
                                  const PolyEstimatorParams& params) {
    return eval_nats(model, model_counts(model), estimator, params);
}

double conditional_entropy_k(const KGramModel& model, SliceEstimator estimator,
                             const PolyEstimatorParams& params) {
    return conditional_entropy_k_nats(model, estimator, params) / M_LN2;
}

CorpusReport subsample_curve(const TokenStream& stream, std::uint32_t k,
                             const std::vector<std::uint64_t>& sizes, SliceEstimator estimator,
                             std::uint64_t seed, const PolyEstimatorParams& params,
                             unsigned threads) {
    KGramModel model = build_kgram(stream, k);
    for (std::uint64_t size : sizes) {
        if (size < 1) throw InvalidArgument("subsample size must be positive");
        if (size > model.n_k) {
            throw SizeExceedsCorpus("requested " + std::to_string(size) + " instances, corpus has " +
                                    std::to_string(model.n_k));
        }
    }

    CorpusReport report;
    report.k = k;
    report.estimator = corpus_estimator_name(estimator);
    report.estimate_bits = conditional_entropy_k(model, estimator, params);

    std::vector<std::uint64_t> cum = instance_cumulative(model);
    std::vector<double> estimates(sizes.size());

    detail::parallel_for(sizes.size(), threads, [&](std::size_t idx) {
        const std::uint64_t m = sizes[idx];
        Rng rng = Rng::substream(seed, {kCurveStream, idx});

        // Floyd's uniform m-subset of [0, n_k)
        std::unordered_set<std::uint64_t> chosen;
        chosen.reserve(std::size_t(m) * 2);
        for (std::uint64_t j = model.n_k - m; j < model.n_k; ++j) {
            std::uint64_t t = rng.below(j + 1);
            if (!chosen.insert(t).second) chosen.insert(j);
        }

        std::vector<std::uint64_t> counts(model.entries.size(), 0);
        for (std::uint64_t inst : chosen) ++counts[locate_cell(cum, inst)];
        estimates[idx] = eval_nats(model, counts, estimator, params) / M_LN2;
    });

    for (std::size_t i = 0; i < sizes.size(); ++i) report.curve.emplace_back(sizes[i], estimates[i]);
    return report;
}

CorpusReport bootstrap_estimate(const TokenStream& stream, std::uint32_t k, std::uint32_t B,
                                SliceEstimator estimator, std::uint64_t seed,
                                const PolyEstimatorParams& params, unsigned threads) {
    if (B < 2) throw InvalidArgument("bootstrap needs at least two replicates");
    KGramModel model = build_kgram(stream, k);

    CorpusReport report;
    report.k = k;
    report.estimator = corpus_estimator_name(estimator);
    report.estimate_bits = conditional_entropy_k(model, estimator, params);

    std::vector<std::uint64_t> cum = instance_cumulative(model);
    std::vector<double> replicate_bits(B);

    detail::parallel_for(B, threads, [&](std::size_t r) {
        Rng rng = Rng::substream(seed, {kBootStream, r});
        std::vector<std::uint64_t> counts(model.entries.size(), 0);
        for (std::uint64_t d = 0; d < model.n_k; ++d) {
            ++counts[locate_cell(cum, rng.below(model.n_k))];
        }
        replicate_bits[r] = eval_nats(model, counts, estimator, params) / M_LN2;
    });

    BootstrapSummary summary;
    summary.replicates = B;
    KahanSum mean_acc;
    summary.min_bits = replicate_bits[0];
    summary.max_bits = replicate_bits[0];
    for (double x : replicate_bits) {
        mean_acc.add(x);
        summary.min_bits = std::min(summary.min_bits, x);
        summary.max_bits = std::max(summary.max_bits, x);
    }
    summary.mean_bits = mean_acc.value() / B;
    KahanSum var_acc;
    for (double x : replicate_bits) {
        var_acc.add((x - summary.mean_bits) * (x - summary.mean_bits));
    }
    summary.sd_bits = std::sqrt(var_acc.value() / (B - 1));
    summary.range_bits = summary.max_bits - summary.min_bits;
    report.bootstrap = summary;
    return report;
}

double perplexity_from_bits(double cross_entropy_bits) {
    if (!std::isfinite(cross_entropy_bits)) {
        throw InvalidArgument("cross entropy must be finite");
    }
    return std::exp2(cross_entropy_bits);
}

std::string corpus_report_to_json(const CorpusReport& report) {
    nlohmann::json doc;
    doc["k"] = report.k;
    doc["estimator"] = report.estimator;
    doc["estimate_bits"] = report.estimate_bits;
    if (report.bootstrap) {
        const BootstrapSummary& b = *report.bootstrap;
        doc["bootstrap"] = {{"mean_bits", b.mean_bits},   {"sd_bits", b.sd_bits},
                            {"range_bits", b.range_bits}, {"min_bits", b.min_bits},
                            {"max_bits", b.max_bits},     {"replicates", b.replicates}};
    }
    if (!report.curve.empty()) {
        nlohmann::json curve = nlohmann::json::array();
        for (const auto& [size, bits] : report.curve) {
            curve.push_back({{"size", size}, {"estimate_bits", bits}});
        }
        doc["curve"] = std::move(curve);
    }
    return doc.dump();
}

std::string curve_to_csv(const CorpusReport& report) {
    std::string out = "size,estimate_bits\n";
    char buf[64];
    for (const auto& [size, bits] : report.curve) {
        std::snprintf(buf, sizeof(buf), "%llu,%.9g\n", (unsigned long long)size, bits);
        out += buf;
    }
    return out;
}

} // namespace entrate
