#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "entrate/errors.hpp"
#include "entrate/markov.hpp"
#include "entrate/rng.hpp"
#include "entrate/simulate.hpp"
#include "test_util.hpp"

using namespace entrate;

TEST_SUITE("simulate") {

TEST_CASE("single-state chains produce constant paths") {
    TransitionMatrix T;
    T.S = 1;
    T.p = {1.0};
    StationaryDist pi{{1.0}};
    for (auto path : {sample_path(T, pi, 5, 3), sample_path_rowwise(T, pi, 5, 3)}) {
        CHECK(path.states == std::vector<std::uint32_t>(6, 0));
        CHECK(path.n() == 5);
    }
}

TEST_CASE("paths are deterministic in the seed") {
    auto T = generate(ChainFamily::zipf(), 4, 0);
    auto pi = stationary(T);
    CHECK(sample_path(T, pi, 100, 7).states == sample_path(T, pi, 100, 7).states);
    CHECK(sample_path(T, pi, 100, 7).states != sample_path(T, pi, 100, 8).states);
    CHECK(sample_path_rowwise(T, pi, 100, 7).states ==
          sample_path_rowwise(T, pi, 100, 7).states);
}

TEST_CASE("flip frequency of the symmetric two-state chain is on target") {
    TransitionMatrix T;
    T.S = 2;
    T.p = {0.7, 0.3, 0.3, 0.7};
    StationaryDist pi{{0.5, 0.5}};
    const std::uint64_t n = 100000;
    auto path = sample_path(T, pi, n, 2024);
    std::uint64_t flips = 0;
    for (std::uint64_t t = 0; t < n; ++t) {
        if (path.states[t + 1] != path.states[t]) ++flips;
    }
    const double freq = double(flips) / double(n);
    const double sigma = std::sqrt(0.3 * 0.7 / double(n));
    CHECK(std::fabs(freq - 0.3) <= 4.0 * sigma);
}

TEST_CASE("deterministic cycles are reproduced by both samplers") {
    TransitionMatrix cycle;
    cycle.S = 3;
    cycle.p = {0, 1, 0, 0, 0, 1, 1, 0, 0};
    StationaryDist pi{{1.0 / 3, 1.0 / 3, 1.0 / 3}};
    for (std::uint64_t seed : {1ull, 9ull}) {
        for (auto path : {sample_path(cycle, pi, 20, seed), sample_path_rowwise(cycle, pi, 20, seed)}) {
            for (std::uint64_t t = 0; t < 20; ++t) {
                REQUIRE(path.states[t + 1] == (path.states[t] + 1) % 3);
            }
        }
    }
}

TEST_CASE("row-sampling construction matches the Markov law in distribution") {
    // Loose screening version of the acceptance check: 1e5 draws, TV <= 0.02.
    auto T = generate(ChainFamily::zipf(), 3, 1);
    auto pi = stationary(T);
    std::vector<double> exact(27, 0.0);
    for (std::uint32_t a = 0; a < 3; ++a) {
        for (std::uint32_t b = 0; b < 3; ++b) {
            for (std::uint32_t c = 0; c < 3; ++c) {
                exact[a * 9 + b * 3 + c] = pi.pi[a] * T.at(a, b) * T.at(b, c);
            }
        }
    }
    std::vector<double> freq(27, 0.0);
    const int draws = 100000;
    for (int r = 0; r < draws; ++r) {
        auto path = sample_path_rowwise(T, pi, 2, std::uint64_t(r) + 1);
        freq[path.states[0] * 9 + path.states[1] * 3 + path.states[2]] += 1.0;
    }
    double tv = 0.0;
    for (int i = 0; i < 27; ++i) tv += std::fabs(freq[std::size_t(i)] / draws - exact[std::size_t(i)]);
    CHECK(tv / 2.0 <= 0.02);
}

TEST_CASE("conditional decomposition on hand traces") {
    // (1,2,1,1) in 1-based state labels is (0,1,0,0) here
    SamplePath path{2, {0, 1, 0, 0}};
    auto d = decompose(path);
    CHECK(d.n_i == std::vector<std::uint64_t>{2, 1});
    CHECK(d.slices[0] == std::vector<std::uint32_t>{1, 0});
    CHECK(d.slices[1] == std::vector<std::uint32_t>{0});
    CHECK(d.pi_hat[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(d.pi_hat[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("constant path decomposition") {
    SamplePath path{1, {0, 0, 0}};
    auto d = decompose(path);
    CHECK(d.slices[0] == std::vector<std::uint32_t>{0, 0});
    CHECK(d.pi_hat[0] == 1.0);
}

TEST_CASE("a state visited only at the last position gets no slice") {
    SamplePath path{2, {0, 1}};
    auto d = decompose(path);
    CHECK(d.slices[0] == std::vector<std::uint32_t>{1});
    CHECK(d.slices[1].empty());
    CHECK(d.pi_hat == std::vector<double>{1.0, 0.0});
}

TEST_CASE("pair counts on hand traces") {
    SamplePath path{2, {0, 1, 0, 1}};
    auto pc = pair_counts(path);
    CHECK(pc.at(0, 1) == 2);
    CHECK(pc.at(1, 0) == 1);
    CHECK(pc.at(0, 0) == 0);
    CHECK(pc.n == 3);

    SamplePath constant{3, std::vector<std::uint32_t>(8, 2)};
    auto pcc = pair_counts(constant);
    CHECK(pcc.at(2, 2) == 7);
    CHECK(pcc.n == 7);
}

TEST_CASE("pair counts and decomposition tell one story") {
    Rng rng(6);
    auto path = testutil::random_path(rng, 5, 300);
    auto d = decompose(path);
    auto pc = pair_counts(path);
    for (std::uint32_t i = 0; i < 5; ++i) {
        std::uint64_t row = 0;
        std::vector<std::uint32_t> expanded;
        for (std::uint32_t j = 0; j < 5; ++j) {
            row += pc.at(i, j);
            expanded.insert(expanded.end(), pc.at(i, j), j);
        }
        CHECK(row == d.n_i[i]);
        auto slice = d.slices[i];
        std::sort(slice.begin(), slice.end());
        CHECK(slice == expanded);
    }
}

TEST_CASE("deviation bound arithmetic") {
    ConfidenceParams params;
    CHECK(params.beta() == doctest::Approx(400.0 / 204.0).epsilon(1e-15));

    // frozen evaluation of the published formula
    CHECK(deviation_bound(0.01, 10000, 0.1, params) ==
          doctest::Approx(0.19194103648752325).epsilon(1e-12));

    // at pi = ln n/(n gamma) the two branches coincide
    const std::uint64_t n = 100;
    const double gamma = 0.5;
    const double crossover = std::log(double(n)) / (double(n) * gamma);
    const double b = deviation_bound(crossover, n, gamma, params);
    CHECK(b == doctest::Approx(params.c3 * crossover).epsilon(1e-14));

    // linear branch takes over below the crossover and the bound grows with pi
    CHECK(deviation_bound(crossover / 4.0, n, gamma, params) == doctest::Approx(b).epsilon(1e-14));
    CHECK(deviation_bound(4.0 * crossover, n, gamma, params) > b);

    CHECK(deviation_failure_prob(10000, params) ==
          doctest::Approx(2.0 * std::pow(10000.0, -params.beta())).epsilon(1e-13));
}

TEST_CASE("deviation bound rejects out-of-domain input") {
    ConfidenceParams params;
    CHECK_THROWS_AS(deviation_bound(-0.1, 100, 0.5, params), InvalidArgument);
    CHECK_THROWS_AS(deviation_bound(1.1, 100, 0.5, params), InvalidArgument);
    CHECK_THROWS_AS(deviation_bound(0.5, 100, 0.0, params), InvalidArgument);
    CHECK_THROWS_AS(deviation_bound(0.5, 100, 1.5, params), InvalidArgument);
    CHECK_THROWS_AS(deviation_bound(0.5, 1, 0.5, params), InvalidArgument);
}

TEST_CASE("path files round-trip and are validated on read") {
    Rng rng(15);
    auto path = testutil::random_path(rng, 4, 50);
    path.states[0] = 3;
    testutil::TempFile file("path");
    write_path_file(file.path(), path);
    auto back = read_path_file(file.path(), 4);
    CHECK(back.states == path.states);
    CHECK(back.S == 4);

    CHECK_THROWS_AS(read_path_file(file.path(), 3), OutOfRangeSymbol);

    testutil::TempFile shorty("path_short");
    shorty.write("2\n");
    CHECK_THROWS_AS(read_path_file(shorty.path(), 4), PathTooShort);

    CHECK_THROWS_AS(read_path_file("/nonexistent/entrate/path", 4), IoFailure);
}

} // TEST_SUITE
