#include "entrate/poly_approx.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <string>

#include "entrate/errors.hpp"

namespace entrate {

double phi_neg_xlogx(double x) {
    return x > 0.0 ? -x * std::log(x) : 0.0;
}

double poly_eval(const PolyCoeffs& pc, double x) {
    // Clenshaw recurrence for sum c_j T_j(t), t = 2x-1.
    const double t = 2.0 * x - 1.0;
    double b1 = 0.0, b2 = 0.0;
    for (int j = pc.degree; j >= 1; --j) {
        const double b0 = pc.chebyshev[std::size_t(j)] + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return pc.chebyshev[0] + t * b1 - b2;
}

namespace {

double error_at(const PolyCoeffs& pc, double x) {
    return phi_neg_xlogx(x) - poly_eval(pc, x);
}

// Solves the Remez linear system on the reference set: find c_0..c_K and E
// with p(x_i) + (-1)^i E = phi(x_i). Overwrites pc.chebyshev; returns E.
double solve_reference(PolyCoeffs& pc, const std::vector<double>& ref) {
    const int K = pc.degree;
    const int m = K + 2;
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        const double t = 2.0 * ref[std::size_t(i)] - 1.0;
        double tj_prev = 1.0, tj = t;
        A(i, 0) = 1.0;
        for (int j = 1; j <= K; ++j) {
            A(i, j) = tj;
            const double next = 2.0 * t * tj - tj_prev;
            tj_prev = tj;
            tj = next;
        }
        A(i, K + 1) = (i % 2 == 0) ? 1.0 : -1.0;
        b(i) = phi_neg_xlogx(ref[std::size_t(i)]);
    }
    Eigen::VectorXd sol = A.colPivHouseholderQr().solve(b);
    pc.chebyshev.assign(std::size_t(K) + 1, 0.0);
    for (int j = 0; j <= K; ++j) pc.chebyshev[std::size_t(j)] = sol(j);
    return sol(K + 1);
}

// Golden-section maximization of sign*error on [lo, hi].
double refine_extremum(const PolyCoeffs& pc, double lo, double hi, double sign) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = sign * error_at(pc, x1);
    double f2 = sign * error_at(pc, x2);
    for (int it = 0; it < 200 && b - a > 1e-17; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = sign * error_at(pc, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = sign * error_at(pc, x1);
        }
    }
    return 0.5 * (a + b);
}

struct Candidate {
    double x;
    double err; // signed error at x
};

// Finds the alternating local extrema of the error function by sign-run
// scanning on a Chebyshev-distributed grid, refined to machine precision.
// Grid points are extrema-dense near 0 where phi's derivative blows up.
std::vector<Candidate> find_extrema(const PolyCoeffs& pc, int grid_points, bool refine) {
    const int M = grid_points;
    std::vector<double> xs(std::size_t(M) + 1);
    std::vector<double> es(std::size_t(M) + 1);
    for (int m = 0; m <= M; ++m) {
        const double x = 0.5 * (1.0 - std::cos(M_PI * double(m) / double(M)));
        xs[std::size_t(m)] = x;
        es[std::size_t(m)] = error_at(pc, x);
    }
    std::vector<Candidate> out;
    int run_start = 0;
    auto flush_run = [&](int lo, int hi) {
        // Best point of one constant-sign run (zero entries ignored).
        int best = -1;
        for (int m = lo; m <= hi; ++m) {
            if (es[std::size_t(m)] == 0.0) continue;
            if (best < 0 || std::abs(es[std::size_t(m)]) > std::abs(es[std::size_t(best)])) best = m;
        }
        if (best < 0) return;
        const double sign = es[std::size_t(best)] > 0.0 ? 1.0 : -1.0;
        double x = xs[std::size_t(best)];
        if (refine) {
            const double lo_x = best > 0 ? xs[std::size_t(best) - 1] : xs[0];
            const double hi_x = best < M ? xs[std::size_t(best) + 1] : xs[std::size_t(M)];
            x = refine_extremum(pc, lo_x, hi_x, sign);
        }
        out.push_back({x, error_at(pc, x)});
    };
    for (int m = 1; m <= M; ++m) {
        const bool flip = (es[std::size_t(m)] > 0.0 && es[std::size_t(run_start)] < 0.0) ||
                          (es[std::size_t(m)] < 0.0 && es[std::size_t(run_start)] > 0.0);
        if (flip) {
            flush_run(run_start, m - 1);
            run_start = m;
        }
    }
    flush_run(run_start, M);
    return out;
}

// Keeps exactly want candidates by trimming the weaker end; alternation is
// preserved because only end elements are dropped.
void trim_candidates(std::vector<Candidate>& cand, std::size_t want) {
    while (cand.size() > want) {
        if (std::abs(cand.front().err) <= std::abs(cand.back().err)) {
            cand.erase(cand.begin());
        } else {
            cand.pop_back();
        }
    }
}

// Converts the Chebyshev representation to monomial coefficients on [0,1].
// Long-double accumulation: shifted-Chebyshev monomial coefficients grow like
// (3+2*sqrt(2))^K, so the conversion cancels heavily at high degree.
void fill_monomial(PolyCoeffs& pc) {
    const int K = pc.degree;
    std::vector<long double> acc(std::size_t(K) + 1, 0.0L);
    std::vector<long double> prev(std::size_t(K) + 1, 0.0L); // T*_{j-1}
    std::vector<long double> cur(std::size_t(K) + 1, 0.0L);  // T*_j
    prev[0] = 1.0L;
    acc[0] = static_cast<long double>(pc.chebyshev[0]);
    if (K >= 1) {
        cur[0] = -1.0L; // T*_1 = 2x - 1
        cur[1] = 2.0L;
        for (int k = 0; k <= 1; ++k) acc[std::size_t(k)] += pc.chebyshev[1] * cur[std::size_t(k)];
    }
    std::vector<long double> next(std::size_t(K) + 1, 0.0L);
    for (int j = 2; j <= K; ++j) {
        // T*_{j} = (4x-2) T*_{j-1} - T*_{j-2}
        for (int k = 0; k <= j; ++k) {
            long double v = -2.0L * cur[std::size_t(k)] - prev[std::size_t(k)];
            if (k > 0) v += 4.0L * cur[std::size_t(k) - 1];
            next[std::size_t(k)] = v;
        }
        for (int k = 0; k <= j; ++k) {
            acc[std::size_t(k)] += pc.chebyshev[std::size_t(j)] * next[std::size_t(k)];
        }
        std::swap(prev, cur);
        std::swap(cur, next);
        std::fill(next.begin(), next.end(), 0.0L);
    }
    pc.monomial.resize(std::size_t(K) + 1);
    for (int k = 0; k <= K; ++k) pc.monomial[std::size_t(k)] = static_cast<double>(acc[std::size_t(k)]);
}

// Core exchange loop shared by the continuous and discrete variants.
// Returns true on convergence within the iteration budget.
bool remez_loop(PolyCoeffs& pc, bool continuous, int max_iters) {
    const int K = pc.degree;
    const std::size_t m = std::size_t(K) + 2;
    // Alternation points of the error cluster near 0 roughly like K^-4 (phi
    // has a log singularity there), so the scan grid must densify with K^2
    // for the Chebyshev map to resolve them.
    const int grid = continuous ? std::max(4096, 8 * K * K) : 4096;

    // Interior Chebyshev nodes: avoids the degenerate first solve that the
    // endpoint extrema produce (phi vanishes at both endpoints).
    std::vector<double> ref(m);
    for (std::size_t i = 0; i < m; ++i) {
        ref[i] = 0.5 * (1.0 - std::cos(M_PI * (2.0 * double(i) + 1.0) / (2.0 * double(m))));
    }

    double E = 0.0;
    for (int iter = 0; iter < max_iters; ++iter) {
        E = solve_reference(pc, ref);
        std::vector<Candidate> cand = find_extrema(pc, grid, continuous);
        if (cand.size() < m) return false;
        trim_candidates(cand, m);
        double max_abs = 0.0, min_abs = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double a = std::abs(cand[i].err);
            max_abs = std::max(max_abs, a);
            min_abs = (i == 0) ? a : std::min(min_abs, a);
        }
        for (std::size_t i = 0; i < m; ++i) ref[i] = cand[i].x;
        if (max_abs - std::abs(E) <= 1e-12 * std::max(std::abs(E), 1e-30) &&
            max_abs - min_abs <= 1e-10 * std::max(max_abs, 1e-30)) {
            pc.sup_error = max_abs;
            pc.alternation = ref;
            fill_monomial(pc);
            return true;
        }
    }
    return false;
}

PolyCoeffs make_coeffs(int K) {
    if (K < 0) throw InvalidArgument("polynomial degree must be nonnegative");
    if (K > kMaxPolyDegree) {
        throw InvalidArgument("polynomial degree " + std::to_string(K) + " exceeds supported maximum " +
                              std::to_string(kMaxPolyDegree));
    }
    PolyCoeffs pc;
    pc.degree = K;
    return pc;
}

} // namespace

PolyCoeffs best_poly_coeffs_discrete(int K) {
    PolyCoeffs pc = make_coeffs(K);
    if (!remez_loop(pc, /*continuous=*/false, 500)) {
        throw ConvergenceFailure("discrete minimax exchange did not converge for degree " + std::to_string(K));
    }
    return pc;
}

PolyCoeffs best_poly_coeffs(int K) {
    PolyCoeffs pc = make_coeffs(K);
    if (remez_loop(pc, /*continuous=*/true, 200)) return pc;
    return best_poly_coeffs_discrete(K);
}

const PolyCoeffs& poly_coeffs_cached(int K) {
    if (K < 0 || K > kMaxPolyDegree) {
        throw InvalidArgument("polynomial degree out of cache range: " + std::to_string(K));
    }
    static std::atomic<const PolyCoeffs*> slots[kMaxPolyDegree + 1] = {};
    std::atomic<const PolyCoeffs*>& slot = slots[K];
    const PolyCoeffs* existing = slot.load(std::memory_order_acquire);
    if (existing) return *existing;
    const PolyCoeffs* fresh = new PolyCoeffs(best_poly_coeffs(K));
    if (slot.compare_exchange_strong(existing, fresh, std::memory_order_acq_rel)) {
        return *fresh;
    }
    delete fresh;
    return *existing;
}

} // namespace entrate
