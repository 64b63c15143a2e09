#include "entrate/markov.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "entrate/errors.hpp"
#include "entrate/rng.hpp"
#include "json.hpp"

namespace entrate {

namespace {

void require_square(const TransitionMatrix& T) {
    if (T.S == 0 || T.p.size() != std::size_t(T.S) * T.S) {
        throw InvalidArgument("transition matrix has inconsistent dimensions");
    }
}

// Count closed communicating classes via Tarjan's SCC (iterative). The chain
// has a unique stationary distribution iff exactly one class is closed.
std::uint32_t closed_class_count(const TransitionMatrix& T) {
    const std::uint32_t S = T.S;
    std::vector<std::vector<std::uint32_t>> adj(S);
    for (std::uint32_t i = 0; i < S; ++i) {
        for (std::uint32_t j = 0; j < S; ++j) {
            if (T.at(i, j) > 0.0) adj[i].push_back(j);
        }
    }

    constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> index(S, kUnvisited), lowlink(S, 0), comp(S, kUnvisited);
    std::vector<bool> on_stack(S, false);
    std::vector<std::uint32_t> stack;
    std::uint32_t next_index = 0, n_comps = 0;

    struct Frame {
        std::uint32_t v;
        std::size_t edge;
    };
    std::vector<Frame> call;

    for (std::uint32_t root = 0; root < S; ++root) {
        if (index[root] != kUnvisited) continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            Frame& f = call.back();
            std::uint32_t v = f.v;
            if (f.edge == 0) {
                index[v] = lowlink[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            bool descended = false;
            while (f.edge < adj[v].size()) {
                std::uint32_t w = adj[v][f.edge++];
                if (index[w] == kUnvisited) {
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
            }
            if (descended) continue;
            if (lowlink[v] == index[v]) {
                while (true) {
                    std::uint32_t w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = n_comps;
                    if (w == v) break;
                }
                ++n_comps;
            }
            call.pop_back();
            if (!call.empty()) {
                std::uint32_t parent = call.back().v;
                lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
            }
        }
    }

    std::vector<bool> closed(n_comps, true);
    for (std::uint32_t i = 0; i < S; ++i) {
        for (std::uint32_t j : adj[i]) {
            if (comp[i] != comp[j]) closed[comp[i]] = false;
        }
    }
    return std::uint32_t(std::count(closed.begin(), closed.end(), true));
}

double stationary_residual(const TransitionMatrix& T, const std::vector<double>& pi) {
    const std::uint32_t S = T.S;
    double res = 0.0;
    for (std::uint32_t j = 0; j < S; ++j) {
        KahanSum acc;
        for (std::uint32_t i = 0; i < S; ++i) acc.add(pi[i] * T.at(i, j));
        res += std::abs(acc.value() - pi[j]);
    }
    return res;
}

void clip_and_renormalize(std::vector<double>& pi) {
    double sum = 0.0;
    for (double& x : pi) {
        if (x < 0.0) x = 0.0;
        sum += x;
    }
    if (sum <= 0.0) throw ConvergenceFailure("stationary solve produced a zero vector");
    for (double& x : pi) x /= sum;
}

std::vector<double> stationary_direct(const TransitionMatrix& T) {
    const std::uint32_t S = T.S;
    // (T^t - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    Eigen::MatrixXd A(S, S);
    for (std::uint32_t i = 0; i < S; ++i) {
        for (std::uint32_t j = 0; j < S; ++j) A(j, i) = T.at(i, j);
    }
    A.diagonal().array() -= 1.0;
    A.row(S - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(S);
    b(S - 1) = 1.0;

    Eigen::VectorXd x = A.partialPivLu().solve(b);
    bool ok = x.allFinite();
    if (ok) {
        for (std::uint32_t i = 0; i < S; ++i) {
            if (x(i) < -1e-9) ok = false;
        }
    }
    if (!ok) {
        // Rank-deficient pivoting accident; overdetermined least squares is
        // immune because the stacked system has full column rank.
        Eigen::MatrixXd B(S + 1, S);
        for (std::uint32_t i = 0; i < S; ++i) {
            for (std::uint32_t j = 0; j < S; ++j) B(j, i) = T.at(i, j);
        }
        for (std::uint32_t j = 0; j < S; ++j) B(j, j) -= 1.0;
        B.row(S).setOnes();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(S + 1);
        rhs(S) = 1.0;
        x = B.colPivHouseholderQr().solve(rhs);
    }

    std::vector<double> pi(x.data(), x.data() + S);
    clip_and_renormalize(pi);

    // A few fixed-point polish steps tighten the residual when the linear
    // solve was stressed by conditioning.
    std::vector<double> next(S);
    double res = stationary_residual(T, pi);
    for (int iter = 0; iter < 50 && res > 1e-13; ++iter) {
        for (std::uint32_t j = 0; j < S; ++j) {
            KahanSum acc;
            for (std::uint32_t i = 0; i < S; ++i) acc.add(pi[i] * T.at(i, j));
            next[j] = acc.value();
        }
        clip_and_renormalize(next);
        double next_res = stationary_residual(T, next);
        if (next_res >= res) break;
        pi.swap(next);
        res = next_res;
    }
    return pi;
}

std::vector<double> stationary_power(const TransitionMatrix& T) {
    const std::uint32_t S = T.S;
    std::vector<double> pi(S, 1.0 / S), next(S);
    // Iterate the lazy kernel (T + I)/2: same stationary vector, but
    // convergent for periodic chains too.
    for (std::uint64_t iter = 0; iter < 1000000; ++iter) {
        for (std::uint32_t j = 0; j < S; ++j) next[j] = 0.5 * pi[j];
        for (std::uint32_t i = 0; i < S; ++i) {
            const double w = 0.5 * pi[i];
            if (w == 0.0) continue;
            const double* row = &T.p[std::size_t(i) * S];
            for (std::uint32_t j = 0; j < S; ++j) next[j] += w * row[j];
        }
        double sum = std::accumulate(next.begin(), next.end(), 0.0);
        double delta = 0.0;
        for (std::uint32_t j = 0; j < S; ++j) {
            next[j] /= sum;
            delta += std::abs(next[j] - pi[j]);
        }
        pi.swap(next);
        if (delta <= 1e-12) return pi;
    }
    throw ConvergenceFailure("stationary power iteration did not converge");
}

} // namespace

TransitionMatrix validate_matrix(std::uint32_t S, std::vector<double> raw, double tol) {
    if (S == 0) throw NotStochastic("matrix must have at least one state");
    if (raw.size() != std::size_t(S) * S) {
        throw NotStochastic("matrix data does not match declared dimension");
    }
    for (std::uint32_t i = 0; i < S; ++i) {
        KahanSum acc;
        for (std::uint32_t j = 0; j < S; ++j) {
            double v = raw[std::size_t(i) * S + j];
            if (!std::isfinite(v) || v < 0.0) {
                throw NotStochastic("row " + std::to_string(i) + " has a negative or non-finite entry");
            }
            acc.add(v);
        }
        double sum = acc.value();
        if (std::abs(sum - 1.0) > tol) {
            throw NotStochastic("row " + std::to_string(i) + " sums to " + std::to_string(sum));
        }
        for (std::uint32_t j = 0; j < S; ++j) raw[std::size_t(i) * S + j] /= sum;
    }
    TransitionMatrix T;
    T.S = S;
    T.p = std::move(raw);
    return T;
}

StationaryDist stationary(const TransitionMatrix& T, StationarySolve method) {
    require_square(T);
    if (closed_class_count(T) != 1) {
        throw NotIrreducible("chain does not have a unique closed communicating class");
    }
    bool direct = method == StationarySolve::Direct ||
                  (method == StationarySolve::Auto && T.S <= 2000);
    std::vector<double> pi = direct ? stationary_direct(T) : stationary_power(T);
    return StationaryDist{std::move(pi)};
}

bool is_reversible(const TransitionMatrix& T, const StationaryDist& pi, double tol) {
    require_square(T);
    if (pi.pi.size() != T.S) throw InvalidArgument("stationary vector size mismatch");
    for (std::uint32_t i = 0; i < T.S; ++i) {
        for (std::uint32_t j = i + 1; j < T.S; ++j) {
            if (std::abs(pi.pi[i] * T.at(i, j) - pi.pi[j] * T.at(j, i)) > tol) return false;
        }
    }
    return true;
}

SpectralInfo spectral_info(const TransitionMatrix& T, const StationaryDist& pi) {
    require_square(T);
    if (!is_reversible(T, pi, 1e-8)) {
        throw NotReversible("spectral gap analysis requires a reversible kernel");
    }
    const std::uint32_t S = T.S;
    for (double x : pi.pi) {
        if (x <= 0.0) throw InvalidArgument("spectral analysis requires strictly positive pi");
    }

    Eigen::MatrixXd M(S, S);
    for (std::uint32_t i = 0; i < S; ++i) {
        for (std::uint32_t j = 0; j < S; ++j) {
            M(i, j) = std::sqrt(pi.pi[i] / pi.pi[j]) * T.at(i, j);
        }
    }
    Eigen::MatrixXd sym = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceFailure("symmetric eigensolve failed");
    }

    SpectralInfo info;
    info.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + S);
    std::sort(info.eigenvalues.begin(), info.eigenvalues.end(), std::greater<double>());

    if (S == 1) {
        info.gamma = info.gamma_star = 1.0;
        info.t_rel = 1.0;
        return info;
    }
    info.gamma = 1.0 - info.eigenvalues[1];
    double max_abs_rest = 0.0;
    for (std::uint32_t i = 1; i < S; ++i) {
        max_abs_rest = std::max(max_abs_rest, std::abs(info.eigenvalues[i]));
    }
    info.gamma_star = 1.0 - max_abs_rest;
    info.t_rel = info.gamma_star > 0.0 ? 1.0 / info.gamma_star
                                       : std::numeric_limits<double>::infinity();
    return info;
}

double entropy_rate_exact(const TransitionMatrix& T, const StationaryDist& pi) {
    require_square(T);
    if (pi.pi.size() != T.S) throw InvalidArgument("stationary vector size mismatch");
    const std::uint32_t S = T.S;

    KahanSum conditional;
    for (std::uint32_t i = 0; i < S; ++i) {
        if (pi.pi[i] == 0.0) continue;
        KahanSum row;
        for (std::uint32_t j = 0; j < S; ++j) {
            double t = T.at(i, j);
            if (t > 0.0) row.add(-t * std::log(t));
        }
        conditional.add(pi.pi[i] * row.value());
    }

    KahanSum pair_entropy, marginal_entropy;
    for (std::uint32_t i = 0; i < S; ++i) {
        double pii = pi.pi[i];
        if (pii == 0.0) continue;
        marginal_entropy.add(-pii * std::log(pii));
        for (std::uint32_t j = 0; j < S; ++j) {
            double joint = pii * T.at(i, j);
            if (joint > 0.0) pair_entropy.add(-joint * std::log(joint));
        }
    }

    double h_cond = std::max(0.0, conditional.value());
    double h_diff = pair_entropy.value() - marginal_entropy.value();
    if (std::abs(h_cond - h_diff) > 1e-12 * std::max(1.0, h_cond)) {
        throw Error("entropy rate identity violated: " + std::to_string(h_cond) + " vs " +
                    std::to_string(h_diff));
    }
    return h_cond;
}

namespace {

TransitionMatrix generate_zipf(std::uint32_t S) {
    std::vector<double> p(std::size_t(S) * S);
    for (std::uint32_t i = 0; i < S; ++i) {
        KahanSum row;
        for (std::uint32_t j = 0; j < S; ++j) row.add(1.0 / double(i + j + 2));
        double z = row.value();
        for (std::uint32_t j = 0; j < S; ++j) p[std::size_t(i) * S + j] = 1.0 / (double(i + j + 2) * z);
    }
    return validate_matrix(S, std::move(p), 1e-9);
}

TransitionMatrix generate_geometric(std::uint32_t S) {
    std::vector<double> p(std::size_t(S) * S);
    for (std::uint32_t i = 0; i < S; ++i) {
        KahanSum row;
        for (std::uint32_t j = 0; j < S; ++j) {
            row.add(std::exp2(-double(i > j ? i - j : j - i)));
        }
        double z = row.value();
        for (std::uint32_t j = 0; j < S; ++j) {
            p[std::size_t(i) * S + j] = std::exp2(-double(i > j ? i - j : j - i)) / z;
        }
    }
    return validate_matrix(S, std::move(p), 1e-9);
}

TransitionMatrix generate_memoryless(const ChainFamily& family, std::uint32_t S) {
    std::vector<double> row;
    if (family.memoryless_row.empty()) {
        row.assign(S, 1.0 / S);
    } else {
        if (family.memoryless_row.size() != S) {
            throw GenerationFailure("memoryless row length does not match S");
        }
        row = family.memoryless_row;
        double sum = std::accumulate(row.begin(), row.end(), 0.0);
        if (sum <= 0.0) throw GenerationFailure("memoryless row must have positive mass");
        for (double& x : row) {
            if (x < 0.0) throw GenerationFailure("memoryless row has a negative entry");
            x /= sum;
        }
    }
    std::vector<double> p;
    p.reserve(std::size_t(S) * S);
    for (std::uint32_t i = 0; i < S; ++i) p.insert(p.end(), row.begin(), row.end());
    return validate_matrix(S, std::move(p), 1e-9);
}

// Symmetric doubly stochastic kernel with a prescribed spectrum. The Soules
// staircase basis has the property that R diag(lambda) R^t is entrywise
// nonnegative for every descending nonnegative spectrum led by lambda_1 = 1,
// so the sampled eigenvalues can be imposed exactly instead of through
// rejection. A seeded random relabeling of states decorrelates the visible
// structure from the basis.
TransitionMatrix generate_uniform_spectrum(std::uint32_t S, double gamma_star,
                                           std::uint64_t seed) {
    if (S < 2) throw GenerationFailure("spectrum family needs at least two states");
    if (!(gamma_star > 0.0 && gamma_star < 1.0)) {
        throw GenerationFailure("gamma_star must lie in (0,1)");
    }
    Rng rng = Rng::substream(seed, {0x756e6973706563ULL, S});

    const double hi = 1.0 - gamma_star;
    std::vector<double> lambda(S);
    lambda[0] = 1.0;
    std::size_t arg_max = 1;
    for (std::uint32_t k = 1; k < S; ++k) {
        lambda[k] = hi * rng.uniform01();
        if (lambda[k] > lambda[arg_max]) arg_max = k;
    }
    lambda[arg_max] = hi; // pin the absolute gap exactly at gamma_star
    std::sort(lambda.begin() + 1, lambda.end(), std::greater<double>());

    Eigen::MatrixXd R(S, S);
    const double inv_sqrt_s = 1.0 / std::sqrt(double(S));
    for (std::uint32_t i = 0; i < S; ++i) R(i, 0) = inv_sqrt_s;
    for (std::uint32_t c = 1; c < S; ++c) {
        const double m = double(S - c); // column c has step at row c-1, tail below
        const double scale = 1.0 / std::sqrt(m * (m + 1.0));
        for (std::uint32_t i = 0; i < S; ++i) {
            if (i + 1 < c) R(i, c) = 0.0;
            else if (i + 1 == c) R(i, c) = m * scale;
            else R(i, c) = -scale;
        }
    }

    Eigen::MatrixXd A = R * Eigen::Map<Eigen::VectorXd>(lambda.data(), S).asDiagonal() *
                        R.transpose();

    std::vector<std::uint32_t> perm(S);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::uint32_t i = S; i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.below(i)]);
    }

    std::vector<double> p(std::size_t(S) * S);
    for (std::uint32_t i = 0; i < S; ++i) {
        for (std::uint32_t j = 0; j < S; ++j) {
            double v = A(perm[i], perm[j]);
            if (v < 0.0) {
                if (v < -1e-12) {
                    throw GenerationFailure("spectrum construction produced a negative entry");
                }
                v = 0.0;
            }
            p[std::size_t(i) * S + j] = v;
        }
    }
    return validate_matrix(S, std::move(p), 1e-9);
}

} // namespace

TransitionMatrix generate(const ChainFamily& family, std::uint32_t S, std::uint64_t seed) {
    if (S == 0) throw GenerationFailure("S must be positive");
    switch (family.kind) {
        case ChainFamily::Kind::Zipf: return generate_zipf(S);
        case ChainFamily::Kind::Geometric: return generate_geometric(S);
        case ChainFamily::Kind::Memoryless: return generate_memoryless(family, S);
        case ChainFamily::Kind::UniformSpectrum:
            return generate_uniform_spectrum(S, family.gamma_star, seed);
    }
    throw GenerationFailure("unknown chain family");
}

std::string matrix_to_csv(const TransitionMatrix& T) {
    require_square(T);
    std::string out;
    char buf[40];
    for (std::uint32_t i = 0; i < T.S; ++i) {
        for (std::uint32_t j = 0; j < T.S; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", T.at(i, j));
            out += buf;
            out += (j + 1 < T.S) ? ',' : '\n';
        }
    }
    return out;
}

std::string matrix_to_json(const TransitionMatrix& T) {
    require_square(T);
    nlohmann::json rows = nlohmann::json::array();
    for (std::uint32_t i = 0; i < T.S; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::uint32_t j = 0; j < T.S; ++j) row.push_back(T.at(i, j));
        rows.push_back(std::move(row));
    }
    nlohmann::json doc;
    doc["S"] = T.S;
    doc["rows"] = std::move(rows);
    return doc.dump();
}

TransitionMatrix matrix_from_csv(const std::string& text) {
    std::vector<double> values;
    std::vector<std::size_t> row_widths;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::size_t width = 0;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            try {
                std::size_t pos = 0;
                double v = std::stod(cell, &pos);
                while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
                if (pos != cell.size()) throw std::invalid_argument(cell);
                values.push_back(v);
            } catch (const std::exception&) {
                throw NotStochastic("unparseable matrix cell: '" + cell + "'");
            }
            ++width;
        }
        row_widths.push_back(width);
    }
    if (row_widths.empty()) throw NotStochastic("matrix text is empty");
    std::size_t S = row_widths.size();
    for (std::size_t w : row_widths) {
        if (w != S) throw NotStochastic("matrix text is not square");
    }
    return validate_matrix(std::uint32_t(S), std::move(values));
}

TransitionMatrix matrix_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw NotStochastic(std::string("bad matrix JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("S") || !doc.contains("rows")) {
        throw NotStochastic("matrix JSON must contain \"S\" and \"rows\"");
    }
    std::uint32_t S;
    std::vector<double> values;
    try {
        S = doc["S"].get<std::uint32_t>();
        for (const auto& row : doc["rows"]) {
            if (!row.is_array() || row.size() != S) {
                throw NotStochastic("matrix JSON rows are not S-length arrays");
            }
            for (const auto& cell : row) values.push_back(cell.get<double>());
        }
        if (doc["rows"].size() != S) throw NotStochastic("matrix JSON does not have S rows");
    } catch (const nlohmann::json::exception& e) {
        throw NotStochastic(std::string("bad matrix JSON: ") + e.what());
    }
    return validate_matrix(S, std::move(values));
}

void write_matrix_file(const std::string& path, const TransitionMatrix& T, MatrixFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path + " for writing");
    out << (format == MatrixFormat::Csv ? matrix_to_csv(T) : matrix_to_json(T));
    if (format == MatrixFormat::Json) out << '\n';
    if (!out.flush()) throw IoFailure("failed writing " + path);
}

TransitionMatrix read_matrix_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return matrix_from_json(text);
    return matrix_from_csv(text);
}

} // namespace entrate
