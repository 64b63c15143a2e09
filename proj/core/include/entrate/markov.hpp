#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entrate/dist.hpp"

namespace entrate {

/*
 * Row-stochastic transition kernels: validation, stationary distribution,
 * reversibility, spectral quantities, exact entropy rate, and the synthetic
 * chain families used by the benchmark harness.
 */

struct TransitionMatrix {
    std::uint32_t S = 0;
    std::vector<double> p; // row-major S*S; row i is the law of the successor of i

    double at(std::uint32_t i, std::uint32_t j) const { return p[std::size_t(i) * S + j]; }
    double& at(std::uint32_t i, std::uint32_t j) { return p[std::size_t(i) * S + j]; }
};

struct StationaryDist {
    std::vector<double> pi;
};

struct SpectralInfo {
    std::vector<double> eigenvalues; // descending; real because the kernel is reversible
    double gamma = 0.0;              // spectral gap 1 - lambda_2
    double gamma_star = 0.0;         // absolute spectral gap 1 - max_{i>=2} |lambda_i|
    double t_rel = 0.0;              // relaxation time 1/gamma_star; +inf when gamma_star = 0
};

struct ChainFamily {
    enum class Kind { UniformSpectrum, Zipf, Geometric, Memoryless };
    Kind kind = Kind::Memoryless;
    double gamma_star = 0.1;            // UniformSpectrum target, in (0,1)
    std::vector<double> memoryless_row; // empty means uniform

    static ChainFamily uniform_spectrum(double gamma_star_target) {
        ChainFamily f;
        f.kind = Kind::UniformSpectrum;
        f.gamma_star = gamma_star_target;
        return f;
    }
    static ChainFamily zipf() { return {Kind::Zipf, 0.0, {}}; }
    static ChainFamily geometric() { return {Kind::Geometric, 0.0, {}}; }
    static ChainFamily memoryless(std::vector<double> row = {}) {
        return {Kind::Memoryless, 0.0, std::move(row)};
    }
};

// Checks nonnegativity and row sums; rows whose sums deviate from 1 by at
// most tol are renormalized. Throws NotStochastic otherwise.
TransitionMatrix validate_matrix(std::uint32_t S, std::vector<double> raw, double tol = 1e-10);

enum class StationarySolve { Auto, Direct, Power };

// Unique pi with pi T = pi. Irreducibility (a single closed communicating
// class) is established via strongly connected components before solving;
// throws NotIrreducible otherwise. Direct linear solve for S <= 2000 under
// Auto, lazy-chain power iteration above.
StationaryDist stationary(const TransitionMatrix& T, StationarySolve method = StationarySolve::Auto);

// Detailed balance check: max_ij |pi_i T_ij - pi_j T_ji| <= tol.
bool is_reversible(const TransitionMatrix& T, const StationaryDist& pi, double tol = 1e-10);

// Real spectrum of the symmetrized kernel D^{1/2} T D^{-1/2} plus the gaps.
// Requires reversibility within 1e-8 (throws NotReversible) and a strictly
// positive pi.
SpectralInfo spectral_info(const TransitionMatrix& T, const StationaryDist& pi);

// Exact rate sum_i pi_i sum_j T_ij ln(1/T_ij) in nats; internally also
// computed as H(pair) - H(marginal) and cross-checked to 1e-12.
double entropy_rate_exact(const TransitionMatrix& T, const StationaryDist& pi);

// Synthetic families. Zipf: T_ij proportional to 1/(i+j), 1-based indices.
// Geometric: proportional to 2^{-|i-j|}. Memoryless: identical rows.
// UniformSpectrum: symmetric doubly stochastic kernel whose nontrivial
// eigenvalues are i.i.d. Uniform[0, 1-gamma_star] with the maximum forced to
// exactly 1-gamma_star (Soules-basis construction; see module source).
TransitionMatrix generate(const ChainFamily& family, std::uint32_t S, std::uint64_t seed);

// Serialization. CSV: S rows of S comma-separated decimals, no header.
// JSON: {"S": int, "rows": [[...]]}. Parsing applies validate_matrix.
std::string matrix_to_csv(const TransitionMatrix& T);
std::string matrix_to_json(const TransitionMatrix& T);
TransitionMatrix matrix_from_csv(const std::string& text);
TransitionMatrix matrix_from_json(const std::string& text);

enum class MatrixFormat { Csv, Json };
void write_matrix_file(const std::string& path, const TransitionMatrix& T, MatrixFormat format);
TransitionMatrix read_matrix_file(const std::string& path); // format inferred from contents

} // namespace entrate
