#include "entrate/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

#include "entrate/errors.hpp"
#include "entrate/rate.hpp"
#include "entrate/rng.hpp"
#include "entrate/simulate.hpp"
#include "json.hpp"
#include "parallel.hpp"

namespace entrate {

namespace {

constexpr std::uint64_t kChainStream = 0x636861696eULL;
constexpr std::uint64_t kPathStream = 0x70617468ULL;

struct FamilySpec {
    std::string name;
    ChainFamily family;
    std::uint64_t code; // stable seed-derivation id
};

FamilySpec resolve_family(const std::string& name, double gamma_star) {
    if (name == "memoryless_uniform") return {name, ChainFamily::memoryless(), 1};
    if (name == "zipf") return {name, ChainFamily::zipf(), 2};
    if (name == "geometric") return {name, ChainFamily::geometric(), 3};
    if (name == "uniform_spectrum") return {name, ChainFamily::uniform_spectrum(gamma_star), 4};
    throw InvalidArgument("unknown chain family: " + name);
}

double run_estimator(const std::string& estimator, const SamplePath& path,
                     const PolyEstimatorParams& poly) {
    if (estimator == "emp") return empirical_rate(path).value;
    if (estimator == "opt") return conditional_rate(path, SliceEstimator::Poly, poly).value;
    if (estimator == "mm") return conditional_rate(path, SliceEstimator::Mm).value;
    if (estimator == "lz") return lz_rate(path).value;
    throw InvalidArgument("unknown estimator: " + estimator);
}

// Round to 9 significant digits (the emitted precision) so every output
// format carries exactly the same numbers.
double snap9(double x) {
    if (!std::isfinite(x)) return x;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return std::strtod(buf, nullptr);
}

std::string format9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

} // namespace

std::vector<std::uint64_t> parse_grid(const std::string& spec) {
    if (spec.empty()) throw InvalidArgument("empty grid spec");
    std::vector<std::uint64_t> grid;

    auto parse_int = [](const std::string& s) -> std::uint64_t {
        std::size_t pos = 0;
        unsigned long long v;
        try {
            v = std::stoull(s, &pos);
        } catch (const std::exception&) {
            throw InvalidArgument("bad grid number: '" + s + "'");
        }
        if (pos != s.size()) throw InvalidArgument("bad grid number: '" + s + "'");
        return v;
    };

    std::size_t colons = std::size_t(std::count(spec.begin(), spec.end(), ':'));
    if (colons == 2) {
        std::size_t a = spec.find(':'), b = spec.find(':', a + 1);
        std::string tail = spec.substr(b + 1);
        if (tail.size() < 4 || tail.compare(0, 3, "log") != 0) {
            throw InvalidArgument("grid spec must be lo:hi:logN or a comma list");
        }
        std::uint64_t lo = parse_int(spec.substr(0, a));
        std::uint64_t hi = parse_int(spec.substr(a + 1, b - a - 1));
        std::uint64_t points = parse_int(tail.substr(3));
        if (lo < 2 || hi < lo || points < 1) throw InvalidArgument("bad grid range");
        if (points == 1) return {lo};
        const double llo = std::log(double(lo)), lhi = std::log(double(hi));
        std::set<std::uint64_t> uniq;
        for (std::uint64_t i = 0; i < points; ++i) {
            double t = llo + (lhi - llo) * double(i) / double(points - 1);
            uniq.insert(std::uint64_t(std::llround(std::exp(t))));
        }
        grid.assign(uniq.begin(), uniq.end());
        return grid;
    }
    if (colons != 0) throw InvalidArgument("grid spec must be lo:hi:logN or a comma list");

    std::size_t start = 0;
    while (start <= spec.size()) {
        std::size_t comma = spec.find(',', start);
        std::string piece = spec.substr(start, comma == std::string::npos ? comma : comma - start);
        if (piece.empty()) throw InvalidArgument("empty grid entry");
        grid.push_back(parse_int(piece));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return grid;
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
    if (config.trials < 1) throw InvalidArgument("trials must be >= 1");
    if (config.S < 2) throw InvalidArgument("bench needs S >= 2");
    if (config.families.empty()) throw InvalidArgument("no chain families selected");
    std::vector<std::uint64_t> grid = config.n_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty()) throw InvalidArgument("empty n grid");
    for (std::uint64_t n : grid) {
        if (n < 2) throw InvalidArgument("grid values must be >= 2");
    }

    std::vector<FamilySpec> families;
    for (const std::string& name : config.families) {
        families.push_back(resolve_family(name, config.gamma_star));
    }
    std::vector<std::string> estimators = config.estimators;
    if (estimators.empty()) estimators = {"emp", "opt", "mm"};
    if (config.include_lz &&
        std::find(estimators.begin(), estimators.end(), "lz") == estimators.end()) {
        estimators.push_back("lz");
    }

    struct Task {
        std::size_t family_idx;
        std::uint64_t n;
        std::uint32_t trial;
    };
    std::vector<Task> tasks;
    for (std::size_t f = 0; f < families.size(); ++f) {
        for (std::uint64_t n : grid) {
            for (std::uint32_t t = 0; t < config.trials; ++t) tasks.push_back({f, n, t});
        }
    }

    struct TrialResult {
        std::vector<double> errors_vs_truth; // estimate - exact, per estimator
        std::vector<std::string> failures;   // nonempty message on failure
    };
    std::vector<TrialResult> results(tasks.size());

    detail::parallel_for(tasks.size(), config.threads, [&](std::size_t idx) {
        const Task& task = tasks[idx];
        const FamilySpec& spec = families[task.family_idx];
        TrialResult& out = results[idx];
        out.errors_vs_truth.assign(estimators.size(), 0.0);
        out.failures.assign(estimators.size(), "");

        double exact = 0.0;
        SamplePath path;
        std::string setup_failure;
        try {
            std::uint64_t chain_seed =
                derive_seed(config.master_seed, {kChainStream, spec.code, task.n, task.trial});
            TransitionMatrix T = generate(spec.family, config.S, chain_seed);
            StationaryDist pi = stationary(T);
            exact = entropy_rate_exact(T, pi);
            std::uint64_t path_seed =
                derive_seed(config.master_seed, {kPathStream, spec.code, task.n, task.trial});
            path = sample_path(T, pi, task.n, path_seed);
        } catch (const std::exception& e) {
            setup_failure = e.what();
        }

        for (std::size_t e = 0; e < estimators.size(); ++e) {
            if (!setup_failure.empty()) {
                out.failures[e] = setup_failure;
                continue;
            }
            if (estimators[e] == "lz" && task.n > config.lz_max_n) {
                out.failures[e] = "skip";
                continue;
            }
            try {
                out.errors_vs_truth[e] = run_estimator(estimators[e], path, config.poly) - exact;
            } catch (const std::exception& ex) {
                out.failures[e] = ex.what();
            }
        }
    });

    // Sequential aggregation in task order keeps output independent of
    // scheduling.
    std::vector<BenchRow> rows;
    for (std::size_t f = 0; f < families.size(); ++f) {
        for (std::uint64_t n : grid) {
            for (std::size_t e = 0; e < estimators.size(); ++e) {
                if (estimators[e] == "lz" && n > config.lz_max_n) continue; // cell omitted

                KahanSum sum_err, sum_sq;
                std::uint32_t ok = 0;
                std::string first_failure;
                for (std::size_t idx = 0; idx < tasks.size(); ++idx) {
                    if (tasks[idx].family_idx != f || tasks[idx].n != n) continue;
                    const TrialResult& r = results[idx];
                    if (!r.failures[e].empty()) {
                        if (first_failure.empty()) first_failure = r.failures[e];
                        continue;
                    }
                    sum_err.add(r.errors_vs_truth[e]);
                    sum_sq.add(r.errors_vs_truth[e] * r.errors_vs_truth[e]);
                    ++ok;
                }

                BenchRow row;
                row.family = families[f].name;
                row.S = config.S;
                row.n = n;
                row.estimator = estimators[e];
                row.trials = ok;
                row.seed = config.master_seed;
                if (ok > 0) {
                    row.mean_error = snap9(sum_err.value() / ok);
                    row.rmse = snap9(std::sqrt(sum_sq.value() / ok));
                    if (ok < config.trials) row.error = first_failure;
                } else {
                    row.mean_error = std::nan("");
                    row.rmse = std::nan("");
                    row.error = first_failure;
                }
                rows.push_back(std::move(row));
            }
            if (config.overlay_thm2) {
                BenchRow row;
                row.family = families[f].name;
                row.S = config.S;
                row.n = n;
                row.estimator = "thm2_bound";
                double bound = snap9(empirical_bias_upper_bound(config.S, n));
                row.rmse = bound;
                row.mean_error = bound;
                row.trials = 0;
                row.seed = 0;
                rows.push_back(std::move(row));
            }
        }
    }

    std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
        if (a.family != b.family) return a.family < b.family;
        if (a.n != b.n) return a.n < b.n;
        return a.estimator < b.estimator;
    });
    return rows;
}

std::string rows_to_csv(const std::vector<BenchRow>& rows) {
    std::string out = "family,S,n,estimator,rmse,mean_error,trials,seed\n";
    char buf[160];
    for (const BenchRow& row : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%u,%llu,%s,%s,%s,%u,%llu\n", row.family.c_str(),
                      row.S, (unsigned long long)row.n, row.estimator.c_str(),
                      format9(row.rmse).c_str(), format9(row.mean_error).c_str(), row.trials,
                      (unsigned long long)row.seed);
        out += buf;
    }
    return out;
}

std::string rows_to_json(const std::vector<BenchRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const BenchRow& row : rows) {
        nlohmann::json obj;
        obj["family"] = row.family;
        obj["S"] = row.S;
        obj["n"] = row.n;
        obj["estimator"] = row.estimator;
        if (std::isnan(row.rmse)) {
            obj["rmse"] = nullptr;
            obj["mean_error"] = nullptr;
        } else {
            obj["rmse"] = row.rmse;
            obj["mean_error"] = row.mean_error;
        }
        obj["trials"] = row.trials;
        obj["seed"] = row.seed;
        if (!row.error.empty()) obj["error"] = row.error;
        arr.push_back(std::move(obj));
    }
    return arr.dump();
}

void emit_report(const std::vector<BenchRow>& rows, const std::string& format,
                 const std::string& path) {
    if (rows.empty()) throw InvalidArgument("no rows to emit");
    std::string payload;
    if (format == "csv") {
        payload = rows_to_csv(rows);
    } else if (format == "json") {
        payload = rows_to_json(rows) + "\n";
    } else {
        throw InvalidArgument("format must be csv or json");
    }
    if (path == "-") {
        std::cout << payload;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path + " for writing");
    out << payload;
    if (!out.flush()) throw IoFailure("failed writing " + path);
}

} // namespace entrate
