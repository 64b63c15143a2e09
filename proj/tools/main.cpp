#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "entrate/bench.hpp"
#include "entrate/corpus.hpp"
#include "entrate/errors.hpp"
#include "entrate/markov.hpp"
#include "entrate/rate.hpp"
#include "entrate/simulate.hpp"
#include "json.hpp"

namespace {

using namespace entrate;

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string unit = "nats";
    unsigned threads = 1;
};

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::string& path, const std::string& payload) {
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

SliceEstimator corpus_estimator(const std::string& name) {
    if (name == "plugin") return SliceEstimator::Plugin;
    if (name == "poly") return SliceEstimator::Poly;
    if (name == "mm") return SliceEstimator::Mm;
    throw InvalidArgument("unknown estimator: " + name);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        std::string piece = s.substr(start, comma == std::string::npos ? comma : comma - start);
        if (!piece.empty()) out.push_back(piece);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

int cmd_gen(const GlobalOpts& global, const std::string& family, std::uint32_t S,
            double gamma_star, const std::string& output, const std::string& format) {
    ChainFamily f;
    if (family == "memoryless_uniform") f = ChainFamily::memoryless();
    else if (family == "zipf") f = ChainFamily::zipf();
    else if (family == "geometric") f = ChainFamily::geometric();
    else if (family == "uniform_spectrum") f = ChainFamily::uniform_spectrum(gamma_star);
    else throw InvalidArgument("unknown chain family: " + family);

    TransitionMatrix T = generate(f, S, global.seed);
    std::string payload = format == "json" ? matrix_to_json(T) + "\n" : matrix_to_csv(T);
    write_text(output, payload);
    return 0;
}

int cmd_simulate(const GlobalOpts& global, const std::string& matrix_file, std::uint64_t n,
                 bool rowwise, const std::string& output) {
    TransitionMatrix T = read_matrix_file(matrix_file);
    StationaryDist pi = stationary(T);
    SamplePath path = rowwise ? sample_path_rowwise(T, pi, n, global.seed)
                              : sample_path(T, pi, n, global.seed);
    if (output == "-") {
        std::string payload;
        for (std::uint32_t s : path.states) {
            payload += std::to_string(s);
            payload += '\n';
        }
        write_text(output, payload);
    } else {
        write_path_file(output, path);
    }
    return 0;
}

int cmd_estimate(const GlobalOpts& global, const std::string& path_file, std::uint32_t S,
                 const std::string& estimator, const PolyEstimatorParams& poly) {
    SamplePath path = read_path_file(path_file, S);

    RateEstimate est;
    if (estimator == "emp") est = empirical_rate(path);
    else if (estimator == "opt") est = conditional_rate(path, SliceEstimator::Poly, poly);
    else if (estimator == "mm") est = conditional_rate(path, SliceEstimator::Mm);
    else if (estimator == "lz") est = lz_rate(path);
    else throw InvalidArgument("unknown estimator: " + estimator);

    const bool bits = global.unit == "bits";
    const double scale = bits ? 1.0 / M_LN2 : 1.0;

    nlohmann::json doc;
    doc["estimator"] = est.estimator;
    doc["value"] = est.value * scale;
    doc["unit"] = global.unit;
    doc["n"] = path.n();
    doc["S"] = S;
    nlohmann::json diag;
    diag["never_visited"] = est.never_visited;
    if (!est.per_state.empty() && S <= 256) {
        nlohmann::json per_state = nlohmann::json::array();
        for (double c : est.per_state) per_state.push_back(c * scale);
        diag["per_state"] = std::move(per_state);
    }
    doc["diagnostics"] = std::move(diag);
    std::cout << doc.dump() << "\n";
    return 0;
}

void apply_bench_config_file(const std::string& path, BenchConfig& config) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad config JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "S") config.S = value.get<std::uint32_t>();
            else if (key == "families") config.families = value.get<std::vector<std::string>>();
            else if (key == "n_grid") config.n_grid = value.get<std::vector<std::uint64_t>>();
            else if (key == "trials") config.trials = value.get<std::uint32_t>();
            else if (key == "estimators") config.estimators = value.get<std::vector<std::string>>();
            else if (key == "master_seed") config.master_seed = value.get<std::uint64_t>();
            else if (key == "gamma_star") config.gamma_star = value.get<double>();
            else if (key == "overlay_thm2") config.overlay_thm2 = value.get<bool>();
            else if (key == "include_lz") config.include_lz = value.get<bool>();
            else if (key == "lz_max_n") config.lz_max_n = value.get<std::uint64_t>();
            else if (key == "threads") config.threads = value.get<unsigned>();
            else if (key == "poly") {
                for (const auto& [pk, pv] : value.items()) {
                    if (pk == "c0") config.poly.c0 = pv.get<double>();
                    else if (pk == "c1") config.poly.c1 = pv.get<double>();
                    else if (pk == "c2") config.poly.c2 = pv.get<double>();
                    else throw InvalidArgument("unknown poly config key: " + pk);
                }
            } else {
                throw InvalidArgument("unknown config key: " + key);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("bad config value: ") + e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy-rate estimation for finite-state Markov chains"};
    app.require_subcommand(1);

    GlobalOpts global;
    auto* seed_opt = app.add_option("--seed", global.seed, "Master RNG seed")->capture_default_str();
    auto* unit_opt = app.add_option("--unit", global.unit, "Output unit")
                         ->check(CLI::IsMember({"nats", "bits"}))
                         ->capture_default_str();
    auto* threads_opt =
        app.add_option("--threads", global.threads, "Worker threads")->capture_default_str();

    PolyEstimatorParams poly;
    // gen
    auto* gen = app.add_subcommand("gen", "Generate a transition matrix");
    std::string gen_family = "uniform_spectrum";
    std::uint32_t gen_S = 200;
    double gen_gamma = 0.1;
    std::string gen_output = "-";
    std::string gen_format = "csv";
    gen->add_option("--family", gen_family,
                    "memoryless_uniform|zipf|geometric|uniform_spectrum")
        ->capture_default_str();
    gen->add_option("--states", gen_S, "Alphabet size S")->capture_default_str();
    gen->add_option("--gamma-star", gen_gamma, "Target absolute spectral gap")
        ->capture_default_str();
    gen->add_option("--output", gen_output, "Output file, - for stdout")->capture_default_str();
    gen->add_option("--format", gen_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Sample a path from a matrix");
    std::string sim_matrix;
    std::uint64_t sim_n = 0;
    bool sim_rowwise = false;
    std::string sim_output = "-";
    simulate->add_option("--matrix", sim_matrix, "Matrix file (csv or json)")->required();
    simulate->add_option("--n", sim_n, "Number of transitions")->required();
    simulate->add_flag("--rowwise", sim_rowwise, "Use the row-sampling construction");
    simulate->add_option("--output", sim_output, "Output file, - for stdout")
        ->capture_default_str();

    // estimate
    auto* estimate = app.add_subcommand("estimate", "Estimate entropy rate from a path file");
    std::string est_path;
    std::uint32_t est_S = 0;
    std::string est_estimator = "opt";
    estimate->add_option("--path", est_path, "Path file of whitespace-separated ids")->required();
    estimate->add_option("--states", est_S, "Alphabet size S")->required();
    estimate->add_option("--estimator", est_estimator, "emp|opt|mm|lz")
        ->check(CLI::IsMember({"emp", "opt", "mm", "lz"}))
        ->capture_default_str();
    estimate->add_option("--poly-c0", poly.c0, "Poly degree constant")->capture_default_str();
    estimate->add_option("--poly-c1", poly.c1, "Poly threshold constant")->capture_default_str();
    estimate->add_option("--poly-c2", poly.c2, "Poly domain constant")->capture_default_str();

    // bench
    auto* bench = app.add_subcommand("bench", "Monte Carlo RMSE benchmark");
    BenchConfig bench_config;
    bench_config.families = {"memoryless_uniform", "zipf", "geometric", "uniform_spectrum"};
    std::string bench_grid = "100:300000:log12";
    std::string bench_families;
    std::string bench_estimators;
    std::string bench_output = "-";
    std::string bench_format = "csv";
    std::string bench_config_file;
    bench->add_option("--config", bench_config_file, "JSON config mirroring BenchConfig");
    bench->add_option("--states", bench_config.S, "Alphabet size S")->capture_default_str();
    auto* bench_families_opt =
        bench->add_option("--families", bench_families, "Comma list of chain families");
    auto* bench_grid_opt =
        bench->add_option("--grid", bench_grid, "n grid: lo:hi:logN or comma list")
            ->capture_default_str();
    bench->add_option("--trials", bench_config.trials, "Trials per cell")->capture_default_str();
    auto* bench_estimators_opt =
        bench->add_option("--estimators", bench_estimators, "Comma list of emp,opt,mm,lz");
    bench->add_option("--gamma-star", bench_config.gamma_star, "uniform_spectrum target gap")
        ->capture_default_str();
    bench->add_flag("--overlay-thm2", bench_config.overlay_thm2,
                    "Add bias-bound overlay rows (estimator=thm2_bound)");
    bench->add_flag("--lz", bench_config.include_lz, "Include the lz estimator (capped n)");
    bench->add_option("--lz-max-n", bench_config.lz_max_n, "Largest n for lz rows")
        ->capture_default_str();
    bench->add_option("--output", bench_output, "Output file, - for stdout")
        ->capture_default_str();
    bench->add_option("--format", bench_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    bench->add_option("--poly-c0", bench_config.poly.c0, "Poly degree constant")
        ->capture_default_str();
    bench->add_option("--poly-c1", bench_config.poly.c1, "Poly threshold constant")
        ->capture_default_str();
    bench->add_option("--poly-c2", bench_config.poly.c2, "Poly domain constant")
        ->capture_default_str();

    // corpus
    auto* corpus = app.add_subcommand("corpus", "Text k-gram entropy pipeline");
    corpus->require_subcommand(1);
    std::string corpus_input;
    std::uint32_t corpus_k = 1;
    std::string corpus_estimator_name = "poly";

    auto add_corpus_common = [&](CLI::App* sub) {
        sub->add_option("--input", corpus_input, "UTF-8 text file")->required();
        sub->add_option("--k", corpus_k, "Memory length k (1..5)")->capture_default_str();
        sub->add_option("--estimator", corpus_estimator_name, "plugin|poly|mm")
            ->check(CLI::IsMember({"plugin", "poly", "mm"}))
            ->capture_default_str();
        sub->add_option("--poly-c0", poly.c0, "Poly degree constant")->capture_default_str();
        sub->add_option("--poly-c1", poly.c1, "Poly threshold constant")->capture_default_str();
        sub->add_option("--poly-c2", poly.c2, "Poly domain constant")->capture_default_str();
    };

    auto* corpus_entropy = corpus->add_subcommand("entropy", "Conditional entropy at one k");
    add_corpus_common(corpus_entropy);

    auto* corpus_curve = corpus->add_subcommand("curve", "Estimates on random subsamples");
    add_corpus_common(corpus_curve);
    std::string curve_sizes;
    std::string curve_csv_out;
    corpus_curve->add_option("--sizes", curve_sizes, "Comma list of subsample sizes")->required();
    corpus_curve->add_option("--csv-out", curve_csv_out,
                             "Also write the curve as CSV (size,estimate_bits)");

    auto* corpus_bootstrap = corpus->add_subcommand("bootstrap", "Bootstrap error range");
    add_corpus_common(corpus_bootstrap);
    std::uint32_t bootstrap_B = 100;
    corpus_bootstrap->add_option("--replicates", bootstrap_B, "Bootstrap replicates")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            return cmd_gen(global, gen_family, gen_S, gen_gamma, gen_output, gen_format);
        }
        if (simulate->parsed()) {
            return cmd_simulate(global, sim_matrix, sim_n, sim_rowwise, sim_output);
        }
        if (estimate->parsed()) {
            return cmd_estimate(global, est_path, est_S, est_estimator, poly);
        }
        if (bench->parsed()) {
            if (!bench_config_file.empty()) apply_bench_config_file(bench_config_file, bench_config);
            if (bench_families_opt->count() > 0) {
                bench_config.families = split_commas(bench_families);
            }
            if (bench_estimators_opt->count() > 0) {
                bench_config.estimators = split_commas(bench_estimators);
            }
            if (bench_grid_opt->count() > 0 || bench_config.n_grid.empty()) {
                bench_config.n_grid = parse_grid(bench_grid);
            }
            // Explicit global flags win over the config file; otherwise the
            // file's values (or the shared defaults) stand.
            if (seed_opt->count() > 0 || bench_config_file.empty()) {
                bench_config.master_seed = global.seed;
            }
            if (threads_opt->count() > 0 || bench_config_file.empty()) {
                bench_config.threads = global.threads;
            }

            std::vector<BenchRow> rows = run_bench(bench_config);
            emit_report(rows, bench_format, bench_output);
            for (const BenchRow& row : rows) {
                if (!row.error.empty()) return 2;
            }
            return 0;
        }
        if (corpus->parsed()) {
            if (unit_opt->count() > 0 && global.unit != "bits") {
                throw InvalidArgument("corpus reports are in bits");
            }
            TokenStream stream = tokenize(read_text_file(corpus_input));
            SliceEstimator est = corpus_estimator(corpus_estimator_name);

            if (corpus_entropy->parsed()) {
                KGramModel model = build_kgram(stream, corpus_k);
                CorpusReport report;
                report.k = corpus_k;
                report.estimator = corpus_estimator_name;
                report.estimate_bits = conditional_entropy_k(model, est, poly);
                std::cout << corpus_report_to_json(report) << "\n";
                return 0;
            }
            if (corpus_curve->parsed()) {
                std::vector<std::uint64_t> sizes;
                for (const std::string& piece : split_commas(curve_sizes)) {
                    sizes.push_back(std::stoull(piece));
                }
                CorpusReport report = subsample_curve(stream, corpus_k, sizes, est, global.seed,
                                                      poly, global.threads);
                std::cout << corpus_report_to_json(report) << "\n";
                if (!curve_csv_out.empty()) write_text(curve_csv_out, curve_to_csv(report));
                return 0;
            }
            if (corpus_bootstrap->parsed()) {
                CorpusReport report = bootstrap_estimate(stream, corpus_k, bootstrap_B, est,
                                                         global.seed, poly, global.threads);
                std::cout << corpus_report_to_json(report) << "\n";
                return 0;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}
