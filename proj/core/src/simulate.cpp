#include "entrate/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "entrate/errors.hpp"
#include "entrate/rng.hpp"

namespace entrate {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974ULL; // initial-state draws
constexpr std::uint64_t kStepStream = 0x73746570ULL; // transition draws
constexpr std::uint64_t kRowStream = 0x726f77ULL;    // per-row draws (rowwise sampler)

std::vector<double> cumulative_rows(const TransitionMatrix& T) {
    const std::uint32_t S = T.S;
    std::vector<double> cum(std::size_t(S) * S);
    for (std::uint32_t i = 0; i < S; ++i) {
        KahanSum acc;
        for (std::uint32_t j = 0; j < S; ++j) {
            acc.add(T.at(i, j));
            cum[std::size_t(i) * S + j] = acc.value();
        }
        cum[std::size_t(i) * S + S - 1] = 1.0; // guard against rounding at the top
    }
    return cum;
}

std::uint32_t lookup(const double* cum, std::uint32_t S, double u) {
    const double* end = cum + S;
    const double* it = std::upper_bound(cum, end, u);
    if (it == end) --it;
    return std::uint32_t(it - cum);
}

void check_pair(const TransitionMatrix& T, const StationaryDist& pi, std::uint64_t n) {
    if (T.S == 0 || T.p.size() != std::size_t(T.S) * T.S) {
        throw InvalidArgument("transition matrix has inconsistent dimensions");
    }
    if (pi.pi.size() != T.S) throw InvalidArgument("stationary vector size mismatch");
    if (n < 1) throw InvalidArgument("need at least one transition");
}

} // namespace

SamplePath sample_path(const TransitionMatrix& T, const StationaryDist& pi, std::uint64_t n,
                       std::uint64_t seed) {
    check_pair(T, pi, n);
    const std::uint32_t S = T.S;
    std::vector<double> cum = cumulative_rows(T);

    std::vector<double> pi_cum(S);
    {
        KahanSum acc;
        for (std::uint32_t i = 0; i < S; ++i) {
            acc.add(pi.pi[i]);
            pi_cum[i] = acc.value();
        }
        pi_cum[S - 1] = 1.0;
    }

    SamplePath path;
    path.S = S;
    path.states.resize(n + 1);

    Rng init = Rng::substream(seed, {kInitStream});
    path.states[0] = lookup(pi_cum.data(), S, init.uniform01());

    Rng steps = Rng::substream(seed, {kStepStream});
    for (std::uint64_t t = 0; t < n; ++t) {
        const double* row = &cum[std::size_t(path.states[t]) * S];
        path.states[t + 1] = lookup(row, S, steps.uniform01());
    }
    return path;
}

SamplePath sample_path_rowwise(const TransitionMatrix& T, const StationaryDist& pi,
                               std::uint64_t n, std::uint64_t seed) {
    check_pair(T, pi, n);
    const std::uint32_t S = T.S;
    std::vector<double> cum = cumulative_rows(T);

    std::vector<double> pi_cum(S);
    {
        KahanSum acc;
        for (std::uint32_t i = 0; i < S; ++i) {
            acc.add(pi.pi[i]);
            pi_cum[i] = acc.value();
        }
        pi_cum[S - 1] = 1.0;
    }

    // One generator per row stands in for the pre-drawn W_{i1}, W_{i2}, ...
    // array: consuming the next variate of row i is exactly reading the next
    // entry of that row.
    std::vector<Rng> row_rng;
    row_rng.reserve(S);
    for (std::uint32_t i = 0; i < S; ++i) row_rng.push_back(Rng::substream(seed, {kRowStream, i}));

    SamplePath path;
    path.S = S;
    path.states.resize(n + 1);

    Rng init = Rng::substream(seed, {kInitStream});
    path.states[0] = lookup(pi_cum.data(), S, init.uniform01());

    for (std::uint64_t t = 0; t < n; ++t) {
        std::uint32_t s = path.states[t];
        const double* row = &cum[std::size_t(s) * S];
        path.states[t + 1] = lookup(row, S, row_rng[s].uniform01());
    }
    return path;
}

ConditionalSlices decompose(const SamplePath& path) {
    if (path.states.size() < 2) throw InvalidArgument("decompose needs at least one transition");
    const std::uint32_t S = path.S;
    const std::uint64_t n = path.n();

    ConditionalSlices out;
    out.n_i.assign(S, 0);
    for (std::uint64_t t = 0; t < n; ++t) {
        std::uint32_t s = path.states[t];
        if (s >= S) throw OutOfRangeSymbol("state id " + std::to_string(s) + " out of range");
        ++out.n_i[s];
    }
    if (path.states[n] >= S) {
        throw OutOfRangeSymbol("state id " + std::to_string(path.states[n]) + " out of range");
    }

    out.slices.resize(S);
    for (std::uint32_t i = 0; i < S; ++i) out.slices[i].reserve(out.n_i[i]);
    for (std::uint64_t t = 0; t < n; ++t) {
        out.slices[path.states[t]].push_back(path.states[t + 1]);
    }

    out.pi_hat.resize(S);
    for (std::uint32_t i = 0; i < S; ++i) out.pi_hat[i] = double(out.n_i[i]) / double(n);
    return out;
}

PairCounts pair_counts(const SamplePath& path) {
    if (path.states.size() < 2) throw InvalidArgument("pair_counts needs at least one transition");
    const std::uint32_t S = path.S;
    if (std::size_t(S) * S > (std::size_t(1) << 26)) {
        throw InvalidArgument("alphabet too large for dense pair counts");
    }
    PairCounts pc;
    pc.S = S;
    pc.cells.assign(std::size_t(S) * S, 0);
    const std::uint64_t n = path.n();
    for (std::uint64_t t = 0; t < n; ++t) {
        std::uint32_t a = path.states[t], b = path.states[t + 1];
        if (a >= S || b >= S) throw OutOfRangeSymbol("state id out of range");
        ++pc.cells[std::size_t(a) * S + b];
    }
    pc.n = n;
    return pc;
}

double deviation_bound(double pi_i, std::uint64_t n, double gamma, const ConfidenceParams& params) {
    if (!(pi_i >= 0.0 && pi_i <= 1.0)) throw InvalidArgument("pi_i must lie in [0,1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in (0,1]");
    if (n < 2) throw InvalidArgument("deviation bound needs n >= 2");
    const double ratio = std::log(double(n)) / (double(n) * gamma);
    return params.c3 * std::max(ratio, std::sqrt(pi_i * ratio));
}

double deviation_failure_prob(std::uint64_t n, const ConfidenceParams& params) {
    if (n < 2) throw InvalidArgument("deviation bound needs n >= 2");
    return 2.0 * std::pow(double(n), -params.beta());
}

void write_path_file(const std::string& file, const SamplePath& path) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + file + " for writing");
    for (std::uint32_t s : path.states) out << s << '\n';
    if (!out.flush()) throw IoFailure("failed writing " + file);
}

SamplePath read_path_file(const std::string& file, std::uint32_t S) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + file);
    SamplePath path;
    path.S = S;
    long long v;
    while (in >> v) {
        if (v < 0 || std::uint64_t(v) >= S) {
            throw OutOfRangeSymbol("path id " + std::to_string(v) + " not in [0," +
                                   std::to_string(S) + ")");
        }
        path.states.push_back(std::uint32_t(v));
    }
    if (!in.eof()) throw IoFailure("unparseable token in " + file);
    if (path.states.size() < 2) throw PathTooShort("path file must contain at least two ids");
    return path;
}

} // namespace entrate
