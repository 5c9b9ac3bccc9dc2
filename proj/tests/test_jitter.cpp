#include "safesim/jitter.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

using namespace safesim;

namespace {

std::vector<TraceRecord> trace_from(const std::vector<std::uint64_t>& timestamps) {
    std::vector<TraceRecord> trace;
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        trace.push_back({i, timestamps[i], i % 2 == 0 ? FrameKind::Command : FrameKind::Status});
    }
    return trace;
}

// Two frames per 1 ms cycle: command on the grid, status 400 us later.
std::vector<TraceRecord> perfect_trace(std::uint64_t cycles, std::uint64_t start_ns = 0) {
    std::vector<std::uint64_t> ts;
    for (std::uint64_t c = 0; c < cycles; ++c) {
        ts.push_back(start_ns + c * 1'000'000);
        ts.push_back(start_ns + c * 1'000'000 + 400'000);
    }
    return trace_from(ts);
}

} // namespace

TEST_CASE("compute_delta2 skips the intra-cycle gap") {
    // us timeline 0, 400, 1000, 1400, 2000 -> three full-cycle estimates.
    const auto trace = trace_from({0, 400'000, 1'000'000, 1'400'000, 2'000'000});
    const auto d2 = compute_delta2(trace);
    CHECK(d2 == std::vector<std::uint64_t>{1'000'000, 1'000'000, 1'000'000});
}

TEST_CASE("compute_delta2 minimal input") {
    const auto d2 = compute_delta2(trace_from({0, 1'000'000, 2'000'000}));
    CHECK(d2 == std::vector<std::uint64_t>{2'000'000});
}

TEST_CASE("compute_delta2 rejects short and non-monotonic traces") {
    CHECK_THROWS_AS(compute_delta2(trace_from({0, 1000})), TraceTooShort);
    try {
        compute_delta2(trace_from({0, 5000, 4000, 9000}));
        FAIL("expected NonMonotonicTimestamps");
    } catch (const NonMonotonicTimestamps& e) {
        CHECK(e.index == 2);
    }
}

TEST_CASE("compute_delta2 matches the brute-force oracle on random traces") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint64_t> ts{rng() % 1000};
        const std::size_t n = 3 + rng() % 200;
        while (ts.size() < n) ts.push_back(ts.back() + rng() % 2'000'000);
        CHECK(compute_delta2(trace_from(ts)) == oracle::delta2_bruteforce(ts));
    }
}

TEST_CASE("perfect trace analyzes to zero jitter") {
    const auto report = analyze(perfect_trace(1000));
    CHECK(report.cycles_analyzed == 1998);
    CHECK(report.nominal_cycle_us == doctest::Approx(1000.0));
    CHECK(report.sigma_us == 0.0);
    CHECK(report.p99_abs_us == 0.0);
    CHECK(report.p999_abs_us == 0.0);
    CHECK(report.max_abs_us == 0.0);
    CHECK(report.excursion_count == 0);
    CHECK(report.missed_cycles == 0);
    CHECK(report.within_band_fraction == 1.0);
}

TEST_CASE("single status frame shifted +321.5 us") {
    // 1000 cycles, record 1001 (status of cycle 500) late by 321.5 us. Exactly
    // two of the 1998 windows see it: one stretched to 1321.5 us, the next
    // squeezed to 678.5 us.
    auto trace = perfect_trace(1000);
    trace[1001].timestamp_ns += 321'500;

    const auto report = analyze(trace);
    CHECK(report.cycles_analyzed == 1998);
    CHECK(report.nominal_cycle_us == doctest::Approx(1000.0));
    CHECK(report.max_abs_us == doctest::Approx(321.5));
    CHECK(report.excursion_count == 2);
    CHECK(report.excursion_fraction == doctest::Approx(2.0 / 1998.0));
    CHECK(report.missed_cycles == 0);
    CHECK(report.within_band_fraction == doctest::Approx(1996.0 / 1998.0));
    // sqrt(2 * 321.5^2 / 1998)
    CHECK(report.sigma_us == doctest::Approx(10.171810).epsilon(1e-6));
    CHECK(report.p99_abs_us == 0.0);
    // rank 0.999 * 1997 = 1995.003, interpolated into the two nonzero tails
    CHECK(report.p999_abs_us == doctest::Approx(0.9645).epsilon(1e-6));
}

TEST_CASE("a 3 ms stall counts as a missed cycle") {
    auto trace = perfect_trace(100);
    for (std::size_t i = 50; i < trace.size(); ++i) trace[i].timestamp_ns += 3'000'000;
    const auto report = analyze(trace);
    CHECK(report.missed_cycles == 2); // both windows crossing the stall exceed 2 ms
}

TEST_CASE("analyze matches the brute-force oracle on random traces") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        GeneratorConfig gcfg;
        gcfg.n_cycles = 100 + rng() % 2000;
        gcfg.sigma_us = static_cast<double>(rng() % 20);
        gcfg.p_tail = static_cast<double>(rng() % 10) / 100.0;
        gcfg.seed = rng();
        const auto trace = generate_trace(gcfg);

        std::vector<std::uint64_t> ts;
        for (const auto& rec : trace) ts.push_back(rec.timestamp_ns);
        const auto want = oracle::jitter_bruteforce(ts);
        const auto got = analyze(trace);

        REQUIRE(got.cycles_analyzed == want.cycles);
        REQUIRE(got.excursion_count == want.excursion_count);
        REQUIRE(got.missed_cycles == want.missed_cycles);
        REQUIRE(got.within_band_fraction ==
                doctest::Approx(static_cast<double>(want.within_band) /
                                static_cast<double>(want.cycles))
                    .epsilon(1e-12));
        REQUIRE(got.nominal_cycle_us == doctest::Approx(want.nominal_us).epsilon(1e-9));
        REQUIRE(got.sigma_us == doctest::Approx(want.sigma_us).epsilon(1e-9));
        REQUIRE(got.p99_abs_us == doctest::Approx(want.p99_abs_us).epsilon(1e-9));
        REQUIRE(got.p999_abs_us == doctest::Approx(want.p999_abs_us).epsilon(1e-9));
        REQUIRE(got.max_abs_us == doctest::Approx(want.max_abs_us).epsilon(1e-9));
    }
}

TEST_CASE("percentiles are ordered: p99 <= p99.9 <= max") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        GeneratorConfig gcfg;
        gcfg.n_cycles = 5000;
        gcfg.sigma_us = 5.0;
        gcfg.p_tail = 0.01;
        gcfg.seed = rng();
        const auto report = analyze(generate_trace(gcfg));
        CHECK(report.p99_abs_us <= report.p999_abs_us);
        CHECK(report.p999_abs_us <= report.max_abs_us);
    }
}

TEST_CASE("jitter scale covariance and shift invariance") {
    GeneratorConfig gcfg;
    gcfg.n_cycles = 2000;
    gcfg.sigma_us = 4.0;
    gcfg.seed = 99;
    auto trace = generate_trace(gcfg);
    const auto base = analyze(trace);

    SUBCASE("shifting every timestamp leaves the report unchanged") {
        for (auto& rec : trace) rec.timestamp_ns += 7'777'777;
        const auto shifted = analyze(trace);
        CHECK(shifted.sigma_us == base.sigma_us);
        CHECK(shifted.max_abs_us == base.max_abs_us);
        CHECK(shifted.excursion_count == base.excursion_count);
    }
    SUBCASE("doubling all deltas doubles sigma and the percentiles") {
        const std::uint64_t t0 = trace.front().timestamp_ns;
        for (auto& rec : trace) rec.timestamp_ns = t0 + (rec.timestamp_ns - t0) * 2;
        const auto scaled = analyze(trace);
        CHECK(scaled.sigma_us == doctest::Approx(2.0 * base.sigma_us).epsilon(1e-9));
        CHECK(scaled.p99_abs_us == doctest::Approx(2.0 * base.p99_abs_us).epsilon(1e-9));
        CHECK(scaled.max_abs_us == doctest::Approx(2.0 * base.max_abs_us).epsilon(1e-9));
    }
}

TEST_CASE("ccdf of a perfect trace is zero everywhere") {
    for (const auto& pt : ccdf(perfect_trace(500))) {
        CHECK(pt.fraction == 0.0);
    }
}

TEST_CASE("ccdf counts strictly-greater exceedances") {
    // 100 cycles; two status frames pushed out by exactly 60 us, so 4 of the
    // 198 windows land at |jitter| = 60.
    auto trace = perfect_trace(100);
    trace[21].timestamp_ns += 60'000;
    trace[61].timestamp_ns += 60'000;
    const auto points = ccdf(trace, {10.0, 50.0, 60.0, 100.0});
    REQUIRE(points.size() == 4);
    CHECK(points[0].fraction == doctest::Approx(4.0 / 198.0));
    CHECK(points[1].fraction == doctest::Approx(4.0 / 198.0));
    CHECK(points[2].fraction == 0.0); // strictly greater than 60
    CHECK(points[3].fraction == 0.0);
}

TEST_CASE("ccdf is non-increasing over the threshold grid") {
    GeneratorConfig gcfg;
    gcfg.n_cycles = 20'000;
    gcfg.sigma_us = 10.0;
    gcfg.p_tail = 0.02;
    gcfg.seed = 7;
    const auto points = ccdf(generate_trace(gcfg));
    for (std::size_t i = 1; i < points.size(); ++i) {
        CHECK(points[i].fraction <= points[i - 1].fraction);
        CHECK(points[i].threshold_us > points[i - 1].threshold_us);
    }
}

TEST_CASE("excursions_per_second places excursions in the right bucket") {
    // 3000 cycles = 3 s of traffic; excursions in seconds 0 and 2.
    auto trace = perfect_trace(3000);
    trace[801].timestamp_ns += 80'000;  // ~0.4 s
    trace[4401].timestamp_ns += 80'000; // ~2.2 s
    const auto buckets = excursions_per_second(trace);
    REQUIRE(buckets.size() == 3);
    CHECK(buckets[0].second == 0);
    CHECK(buckets[0].count == 2);
    CHECK(buckets[1].count == 0);
    CHECK(buckets[2].count == 2);
}

TEST_CASE("per-second buckets partition the total excursion count") {
    GeneratorConfig gcfg;
    gcfg.n_cycles = 10'000; // 10 s
    gcfg.sigma_us = 8.0;
    gcfg.p_tail = 0.01;
    gcfg.seed = 42;
    const auto trace = generate_trace(gcfg);
    const auto report = analyze(trace);
    std::uint64_t total = 0;
    for (const auto& b : excursions_per_second(trace)) total += b.count;
    CHECK(total == report.excursion_count);
}

TEST_CASE("generator with zero noise emits a perfect grid") {
    GeneratorConfig gcfg;
    gcfg.n_cycles = 100;
    gcfg.seed = 5;
    const auto report = analyze(generate_trace(gcfg));
    CHECK(report.sigma_us == 0.0);
    CHECK(report.max_abs_us == 0.0);
    CHECK(report.nominal_cycle_us == doctest::Approx(1000.0));
}

TEST_CASE("generator sigma is recovered by the analyzer") {
    GeneratorConfig gcfg;
    gcfg.n_cycles = 100'000;
    gcfg.sigma_us = 2.0;
    gcfg.seed = 12345;
    const auto report = analyze(generate_trace(gcfg));
    CHECK(report.sigma_us > 1.9);
    CHECK(report.sigma_us < 2.1);
    CHECK(report.excursion_count == 0); // no tail configured, 25 sigma is out of reach
}

TEST_CASE("tail probability is recovered as the excursion fraction") {
    GeneratorConfig gcfg;
    gcfg.n_cycles = 200'000;
    gcfg.sigma_us = 10.0;
    gcfg.p_tail = 0.02;
    gcfg.seed = 777;
    const auto report = analyze(generate_trace(gcfg));
    CHECK(report.excursion_fraction > 0.01);
    CHECK(report.excursion_fraction < 0.03);
}

TEST_CASE("generator is deterministic per seed") {
    GeneratorConfig gcfg;
    gcfg.n_cycles = 1000;
    gcfg.sigma_us = 3.0;
    gcfg.p_tail = 0.05;
    gcfg.seed = 31337;
    const auto a = generate_trace(gcfg);
    const auto b = generate_trace(gcfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].timestamp_ns == b[i].timestamp_ns);
    }
    gcfg.seed = 31338;
    const auto c = generate_trace(gcfg);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) any_diff |= a[i].timestamp_ns != c[i].timestamp_ns;
    CHECK(any_diff);
}

TEST_CASE("generator rejects nonsense configs") {
    GeneratorConfig gcfg;
    gcfg.n_cycles = 2;
    CHECK_THROWS_AS(generate_trace(gcfg), InvalidConfig);
    gcfg.n_cycles = 10;
    gcfg.sigma_us = -1.0;
    CHECK_THROWS_AS(generate_trace(gcfg), InvalidConfig);
    gcfg.sigma_us = 1.0;
    gcfg.p_tail = 1.5;
    CHECK_THROWS_AS(generate_trace(gcfg), InvalidConfig);
    gcfg.p_tail = 0.0;
    gcfg.tail_min_us = 100.0;
    gcfg.tail_max_us = 50.0;
    CHECK_THROWS_AS(generate_trace(gcfg), InvalidConfig);
}

TEST_CASE("trace csv roundtrip") {
    GeneratorConfig gcfg;
    gcfg.n_cycles = 500;
    gcfg.sigma_us = 6.0;
    gcfg.seed = 8;
    const auto trace = generate_trace(gcfg);

    const auto path = std::filesystem::temp_directory_path() / "safesim_test_trace.csv";
    write_trace_csv(path, trace);
    const auto loaded = read_trace_csv(path);
    std::filesystem::remove(path);

    REQUIRE(loaded.size() == trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(loaded[i].index == trace[i].index);
        CHECK(loaded[i].timestamp_ns == trace[i].timestamp_ns);
        CHECK(loaded[i].frame_kind == trace[i].frame_kind);
    }
}
