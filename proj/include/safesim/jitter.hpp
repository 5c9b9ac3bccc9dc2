#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace safesim {

enum class FrameKind : std::uint8_t {
    Command,
    Status,
    Unknown,
};

std::string_view to_string(FrameKind k);

struct TraceRecord {
    std::uint64_t index = 0;
    std::uint64_t timestamp_ns = 0;
    FrameKind frame_kind = FrameKind::Unknown;
};

struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TraceTooShort : TraceError {
    TraceTooShort() : TraceError("trace too short: need at least 3 records") {}
};
struct NonMonotonicTimestamps : TraceError {
    explicit NonMonotonicTimestamps(std::uint64_t index)
        : TraceError("non-monotonic timestamp at index " + std::to_string(index)), index(index) {}
    std::uint64_t index;
};

// Cycle-period estimator skipping the intra-cycle gap between the two
// frames of one fieldbus cycle: out[n-2] = t[n] - t[n-2] for all n >= 2.
std::vector<std::uint64_t> compute_delta2(const std::vector<TraceRecord>& trace);

struct AnalyzeConfig {
    double excursion_threshold_us = 50.0;
    double missed_cycle_threshold_ms = 2.0;
    double band_us = 10.0; // within-nominal band
};

struct JitterReport {
    double nominal_cycle_us = 0.0; // median of the cycle estimates
    double sigma_us = 0.0;         // population SD of signed jitter
    double p99_abs_us = 0.0;
    double p999_abs_us = 0.0;
    double max_abs_us = 0.0;
    double excursion_fraction = 0.0;
    std::uint64_t excursion_count = 0;
    std::uint64_t missed_cycles = 0;
    double within_band_fraction = 0.0;
    std::uint64_t cycles_analyzed = 0;
};

JitterReport analyze(const std::vector<TraceRecord>& trace, const AnalyzeConfig& cfg = {});

struct CcdfPoint {
    double threshold_us = 0.0;
    double fraction = 0.0; // fraction of cycles with |jitter| strictly above
};

inline const std::vector<double> kDefaultCcdfGrid = {1, 2, 5, 10, 20, 50, 100, 200, 500};

std::vector<CcdfPoint> ccdf(const std::vector<TraceRecord>& trace,
                            const std::vector<double>& thresholds_us = kDefaultCcdfGrid);

struct PerSecondBucket {
    std::uint64_t second = 0;
    std::uint64_t count = 0;
};

// Excursions per wall second; each cycle is assigned to the second of its
// window-end frame, buckets zero-filled through the last.
std::vector<PerSecondBucket> excursions_per_second(const std::vector<TraceRecord>& trace,
                                                   double threshold_us = 50.0);

// Synthetic two-frames-per-cycle trace generator. Per cycle one phase-noise
// draw (Gaussian plus a uniform positive tail excursion with probability
// p_tail) perturbs the cycle's status frame; command frames stay on the
// ideal grid, so every cycle re-anchors and no error accumulates.
struct GeneratorConfig {
    std::uint64_t n_cycles = 0;
    double nominal_us = 1000.0;
    double sigma_us = 0.0;
    double p_tail = 0.0;
    double tail_min_us = 50.0;
    double tail_max_us = 350.0;
    std::uint64_t seed = 0;
    std::uint64_t start_ns = 0;
};

struct InvalidConfig : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<TraceRecord> generate_trace(const GeneratorConfig& cfg);

// trace.csv: header "index,timestamp_ns,frame_kind", integer nanoseconds.
std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path);
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRecord>& trace);

std::string report_to_json(const JitterReport& report);

// CLI entry point shared by the `jitter` binary and the acceptance suite.
int analyze_cli(const std::vector<std::string>& args);

} // namespace safesim
