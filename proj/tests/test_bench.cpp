#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <tuple>
#include <vector>

#include "doctest.h"
#include "entrate/bench.hpp"
#include "entrate/errors.hpp"
#include "entrate/rate.hpp"
#include "test_util.hpp"

#include "json.hpp"

using namespace entrate;

namespace {

BenchConfig small_config() {
    BenchConfig config;
    config.S = 6;
    config.families = {"memoryless_uniform", "zipf"};
    config.n_grid = {50, 200};
    config.trials = 3;
    config.estimators = {"emp", "opt"};
    config.master_seed = 42;
    return config;
}

const BenchRow* find_row(const std::vector<BenchRow>& rows, const std::string& family,
                         std::uint64_t n, const std::string& estimator) {
    for (const auto& r : rows) {
        if (r.family == family && r.n == n && r.estimator == estimator) return &r;
    }
    return nullptr;
}

} // namespace

TEST_SUITE("bench") {

TEST_CASE("grid parsing handles both syntaxes") {
    CHECK(parse_grid("100:1000:log3") == std::vector<std::uint64_t>{100, 316, 1000});
    CHECK(parse_grid("5,7,9") == std::vector<std::uint64_t>{5, 7, 9});
    CHECK(parse_grid("10:10:log4") == std::vector<std::uint64_t>{10});
    CHECK(parse_grid("100:1000:log1") == std::vector<std::uint64_t>{100});

    CHECK_THROWS_AS(parse_grid(""), InvalidArgument);
    CHECK_THROWS_AS(parse_grid("abc"), InvalidArgument);
    CHECK_THROWS_AS(parse_grid("100:10:log3"), InvalidArgument);
    CHECK_THROWS_AS(parse_grid("100:1000:log0"), InvalidArgument);
    CHECK_THROWS_AS(parse_grid("5,,7"), InvalidArgument);
}

TEST_CASE("the harness is deterministic, including across thread counts") {
    auto config = small_config();
    auto rows1 = run_bench(config);
    auto rows2 = run_bench(config);
    CHECK(rows_to_csv(rows1) == rows_to_csv(rows2));

    config.threads = 4;
    auto rows4 = run_bench(config);
    CHECK(rows_to_csv(rows1) == rows_to_csv(rows4));
    CHECK(rows_to_json(rows1) == rows_to_json(rows4));
}

TEST_CASE("rows come back sorted by family, n, estimator") {
    auto rows = run_bench(small_config());
    REQUIRE(rows.size() == 8);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto key = [](const BenchRow& r) { return std::tie(r.family, r.n, r.estimator); };
        CHECK(key(rows[i - 1]) < key(rows[i]));
    }
}

TEST_CASE("every row respects the rmse/mean_error inequality") {
    auto rows = run_bench(small_config());
    for (const auto& r : rows) {
        CHECK(r.rmse >= 0.0);
        CHECK(r.rmse >= std::fabs(r.mean_error) - 1e-12);
        CHECK(r.trials == 3);
        CHECK(r.error.empty());
        CHECK(r.S == 6);
    }
}

TEST_CASE("empirical estimator is accurate in the data-rich regime") {
    BenchConfig config;
    config.S = 4;
    config.families = {"memoryless_uniform"};
    config.n_grid = {1600}; // 100 * S^2
    config.trials = 5;
    config.estimators = {"emp"};
    config.master_seed = 1;
    auto rows = run_bench(config);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].rmse <= 0.05);
}

TEST_CASE("empirical estimator underestimates on average") {
    BenchConfig config;
    config.S = 4;
    config.families = {"memoryless_uniform"};
    config.n_grid = {100};
    config.trials = 100;
    config.estimators = {"emp"};
    config.master_seed = 2;
    auto rows = run_bench(config);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_error < 0.0);
}

TEST_CASE("bound overlay rows mirror the closed-form bound") {
    auto config = small_config();
    config.overlay_thm2 = true;
    auto rows = run_bench(config);
    for (const auto& family : config.families) {
        for (auto n : config.n_grid) {
            const auto* row = find_row(rows, family, n, "thm2_bound");
            REQUIRE(row != nullptr);
            const double bound = empirical_bias_upper_bound(config.S, n);
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.9g", bound);
            CHECK(row->rmse == std::strtod(buf, nullptr));
            CHECK(row->mean_error == row->rmse);
            CHECK(row->trials == 0);
            CHECK(row->seed == 0);
        }
    }
}

TEST_CASE("lz joins only under its flag and its size cap") {
    auto config = small_config();
    config.include_lz = true;
    config.lz_max_n = 100;
    auto rows = run_bench(config);
    CHECK(find_row(rows, "zipf", 50, "lz") != nullptr);
    CHECK(find_row(rows, "zipf", 200, "lz") == nullptr);

    auto without = run_bench(small_config());
    for (const auto& r : without) CHECK(r.estimator != "lz");
}

TEST_CASE("unknown estimators surface as error rows, not exceptions") {
    auto config = small_config();
    config.families = {"zipf"};
    config.estimators = {"bogus"};
    auto rows = run_bench(config);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK_FALSE(r.error.empty());
        CHECK(r.trials == 0);
        CHECK(std::isnan(r.rmse));
        CHECK(std::isnan(r.mean_error));
    }
    CHECK(rows_to_csv(rows).find("nan") != std::string::npos);
    CHECK(rows_to_json(rows).find("null") != std::string::npos);
    CHECK(rows_to_json(rows).find("\"error\"") != std::string::npos);
}

TEST_CASE("config validation") {
    auto bad_family = small_config();
    bad_family.families = {"diagonal"};
    CHECK_THROWS_AS(run_bench(bad_family), InvalidArgument);

    auto empty_grid = small_config();
    empty_grid.n_grid = {};
    CHECK_THROWS_AS(run_bench(empty_grid), InvalidArgument);

    // An out-of-order grid is tolerated: rows come back in sorted order.
    auto unsorted_grid = small_config();
    unsorted_grid.n_grid = {200, 50};
    auto sorted_grid = small_config();
    auto rows_a = run_bench(unsorted_grid);
    auto rows_b = run_bench(sorted_grid);
    REQUIRE(rows_a.size() == rows_b.size());
    for (std::size_t i = 0; i < rows_a.size(); ++i) {
        CHECK(rows_a[i].n == rows_b[i].n);
        CHECK(rows_a[i].estimator == rows_b[i].estimator);
    }

    auto tiny_grid = small_config();
    tiny_grid.n_grid = {1};
    CHECK_THROWS_AS(run_bench(tiny_grid), InvalidArgument);

    auto no_trials = small_config();
    no_trials.trials = 0;
    CHECK_THROWS_AS(run_bench(no_trials), InvalidArgument);
}

TEST_CASE("csv and json carry identical numeric values") {
    auto rows = run_bench(small_config());
    const auto csv = rows_to_csv(rows);
    const auto parsed = nlohmann::json::parse(rows_to_json(rows));
    REQUIRE(parsed.size() == rows.size());

    // walk the CSV body in step with the JSON array
    std::size_t pos = csv.find('\n') + 1;
    for (const auto& obj : parsed) {
        const std::size_t end = csv.find('\n', pos);
        const std::string line = csv.substr(pos, end - pos);
        pos = end + 1;

        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        REQUIRE(fields.size() == 8);
        CHECK(fields[0] == obj["family"].get<std::string>());
        CHECK(std::stoull(fields[2]) == obj["n"].get<std::uint64_t>());
        CHECK(fields[3] == obj["estimator"].get<std::string>());
        CHECK(std::strtod(fields[4].c_str(), nullptr) == obj["rmse"].get<double>());
        CHECK(std::strtod(fields[5].c_str(), nullptr) == obj["mean_error"].get<double>());
    }
}

TEST_CASE("reported doubles are stable under a 9-digit round trip") {
    auto rows = run_bench(small_config());
    for (const auto& r : rows) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.9g", r.rmse);
        CHECK(std::strtod(buf, nullptr) == r.rmse);
        std::snprintf(buf, sizeof buf, "%.9g", r.mean_error);
        CHECK(std::strtod(buf, nullptr) == r.mean_error);
    }
}

TEST_CASE("emit_report writes files and accepts only known formats") {
    auto rows = run_bench(small_config());

    testutil::TempFile out("bench_csv");
    emit_report(rows, "csv", out.path());
    const auto text = out.read();
    CHECK(text.rfind("family,S,n,estimator,rmse,mean_error,trials,seed\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 9); // header + 8 rows

    std::vector<BenchRow> one(rows.begin(), rows.begin() + 1);
    testutil::TempFile single("bench_one");
    emit_report(one, "csv", single.path());
    const std::string single_text = single.read();
    CHECK(std::count(single_text.begin(), single_text.end(), '\n') == 2);

    testutil::TempFile json_out("bench_json");
    emit_report(rows, "json", json_out.path());
    auto parsed = nlohmann::json::parse(json_out.read());
    CHECK(parsed.is_array());

    CHECK_THROWS_AS(emit_report(rows, "xml", out.path()), InvalidArgument);
    CHECK_THROWS_AS(emit_report(rows, "csv", "/nonexistent/entrate/report"), IoFailure);
}

} // TEST_SUITE
