#include "safesim/jitter.hpp"

#include "safesim/phase_noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace safesim {

std::string_view to_string(FrameKind k) {
    switch (k) {
        case FrameKind::Command: return "command";
        case FrameKind::Status: return "status";
        case FrameKind::Unknown: return "unknown";
    }
    return "?";
}

std::vector<std::uint64_t> compute_delta2(const std::vector<TraceRecord>& trace) {
    if (trace.size() < 3) throw TraceTooShort{};
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i].timestamp_ns < trace[i - 1].timestamp_ns) {
            throw NonMonotonicTimestamps{static_cast<std::uint64_t>(i)};
        }
    }
    std::vector<std::uint64_t> out(trace.size() - 2);
    for (std::size_t n = 2; n < trace.size(); ++n) {
        out[n - 2] = trace[n].timestamp_ns - trace[n - 2].timestamp_ns;
    }
    return out;
}

namespace {

double median_of_sorted(const std::vector<double>& sorted) {
    const std::size_t m = sorted.size();
    if (m % 2 == 1) return sorted[m / 2];
    return (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0;
}

// Linear interpolation between order statistics: rank = p/100 * (m-1).
double percentile_of_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = static_cast<std::size_t>(std::ceil(rank));
    if (lo == hi) return sorted[lo];
    const double w = rank - static_cast<double>(lo);
    return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

std::vector<double> signed_jitter_us(const std::vector<std::uint64_t>& delta2, double& nominal_us) {
    std::vector<double> periods_us(delta2.size());
    for (std::size_t i = 0; i < delta2.size(); ++i) {
        periods_us[i] = static_cast<double>(delta2[i]) / 1000.0;
    }
    std::vector<double> sorted = periods_us;
    std::sort(sorted.begin(), sorted.end());
    nominal_us = median_of_sorted(sorted);
    for (double& v : periods_us) v -= nominal_us;
    return periods_us;
}

} // namespace

JitterReport analyze(const std::vector<TraceRecord>& trace, const AnalyzeConfig& cfg) {
    const auto delta2 = compute_delta2(trace);

    JitterReport report;
    report.cycles_analyzed = delta2.size();

    const auto jitter = [&] {
        double nominal = 0.0;
        auto j = signed_jitter_us(delta2, nominal);
        report.nominal_cycle_us = nominal;
        return j;
    }();

    double sum_sq = 0.0;
    double mean = 0.0;
    for (double j : jitter) mean += j;
    mean /= static_cast<double>(jitter.size());
    for (double j : jitter) sum_sq += (j - mean) * (j - mean);
    report.sigma_us = std::sqrt(sum_sq / static_cast<double>(jitter.size()));

    std::vector<double> abs_jitter(jitter.size());
    for (std::size_t i = 0; i < jitter.size(); ++i) abs_jitter[i] = std::abs(jitter[i]);
    std::vector<double> sorted_abs = abs_jitter;
    std::sort(sorted_abs.begin(), sorted_abs.end());
    report.p99_abs_us = percentile_of_sorted(sorted_abs, 99.0);
    report.p999_abs_us = percentile_of_sorted(sorted_abs, 99.9);
    report.max_abs_us = sorted_abs.back();

    std::uint64_t excursions = 0;
    std::uint64_t within = 0;
    std::uint64_t missed = 0;
    const double missed_threshold_us = cfg.missed_cycle_threshold_ms * 1000.0;
    for (std::size_t i = 0; i < jitter.size(); ++i) {
        if (abs_jitter[i] > cfg.excursion_threshold_us) ++excursions;
        if (abs_jitter[i] <= cfg.band_us) ++within;
        if (static_cast<double>(delta2[i]) / 1000.0 > missed_threshold_us) ++missed;
    }
    report.excursion_count = excursions;
    report.excursion_fraction =
        static_cast<double>(excursions) / static_cast<double>(jitter.size());
    report.within_band_fraction = static_cast<double>(within) / static_cast<double>(jitter.size());
    report.missed_cycles = missed;
    return report;
}

std::vector<CcdfPoint> ccdf(const std::vector<TraceRecord>& trace,
                            const std::vector<double>& thresholds_us) {
    const auto delta2 = compute_delta2(trace);
    double nominal = 0.0;
    const auto jitter = signed_jitter_us(delta2, nominal);

    std::vector<double> thresholds = thresholds_us;
    std::sort(thresholds.begin(), thresholds.end());

    std::vector<CcdfPoint> out;
    out.reserve(thresholds.size());
    for (double thr : thresholds) {
        std::uint64_t above = 0;
        for (double j : jitter) {
            if (std::abs(j) > thr) ++above;
        }
        out.push_back({thr, static_cast<double>(above) / static_cast<double>(jitter.size())});
    }
    return out;
}

std::vector<PerSecondBucket> excursions_per_second(const std::vector<TraceRecord>& trace,
                                                   double threshold_us) {
    const auto delta2 = compute_delta2(trace);
    double nominal = 0.0;
    const auto jitter = signed_jitter_us(delta2, nominal);

    const std::uint64_t t0 = trace.front().timestamp_ns;
    const std::uint64_t last_second = (trace.back().timestamp_ns - t0) / 1'000'000'000ull;

    std::vector<PerSecondBucket> buckets(last_second + 1);
    for (std::size_t i = 0; i < buckets.size(); ++i) buckets[i].second = i;
    for (std::size_t i = 0; i < jitter.size(); ++i) {
        // Cycle i spans records [i, i+2]; it is assigned to its end frame.
        const std::uint64_t sec = (trace[i + 2].timestamp_ns - t0) / 1'000'000'000ull;
        if (std::abs(jitter[i]) > threshold_us) buckets[sec].count += 1;
    }
    return buckets;
}

std::vector<TraceRecord> generate_trace(const GeneratorConfig& cfg) {
    if (cfg.n_cycles < 3) throw InvalidConfig("n_cycles must be >= 3");
    if (cfg.nominal_us <= 0.0) throw InvalidConfig("nominal_us must be positive");
    if (cfg.sigma_us < 0.0 || cfg.p_tail < 0.0 || cfg.p_tail > 1.0) {
        throw InvalidConfig("sigma_us must be >= 0 and p_tail within [0,1]");
    }
    if (cfg.tail_min_us > cfg.tail_max_us) throw InvalidConfig("tail range inverted");

    PhaseNoise noise(cfg.seed);
    const PhaseNoise::Params params{cfg.sigma_us, cfg.p_tail, cfg.tail_min_us, cfg.tail_max_us};
    const double period_ns = cfg.nominal_us * 1000.0;
    const double status_offset_ns = 0.4 * period_ns;

    std::vector<TraceRecord> trace;
    trace.reserve(cfg.n_cycles * 2);
    for (std::uint64_t c = 0; c < cfg.n_cycles; ++c) {
        const double base_ns = static_cast<double>(cfg.start_ns) + static_cast<double>(c) * period_ns;

        double phase_ns = noise.draw_ns(params);
        // Keep the status frame strictly inside its cycle.
        phase_ns = std::clamp(phase_ns, -status_offset_ns + 1.0, period_ns - status_offset_ns - 1.0);

        trace.push_back({2 * c, static_cast<std::uint64_t>(std::llround(base_ns)),
                         FrameKind::Command});
        trace.push_back({2 * c + 1,
                         static_cast<std::uint64_t>(std::llround(base_ns + status_offset_ns + phase_ns)),
                         FrameKind::Status});
    }
    return trace;
}

std::vector<TraceRecord> read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open trace file: " + path.string());

    std::vector<TraceRecord> trace;
    std::string line;
    if (!std::getline(in, line) || line.rfind("index,timestamp_ns,frame_kind", 0) != 0) {
        throw TraceError("malformed trace header in " + path.string());
    }
    std::uint64_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string idx_s, ts_s, kind_s;
        if (!std::getline(ss, idx_s, ',') || !std::getline(ss, ts_s, ',') ||
            !std::getline(ss, kind_s)) {
            throw TraceError("malformed trace row at line " + std::to_string(line_no));
        }
        TraceRecord rec;
        try {
            rec.index = std::stoull(idx_s);
            rec.timestamp_ns = std::stoull(ts_s);
        } catch (const std::exception&) {
            throw TraceError("malformed trace row at line " + std::to_string(line_no));
        }
        if (kind_s == "command") rec.frame_kind = FrameKind::Command;
        else if (kind_s == "status") rec.frame_kind = FrameKind::Status;
        else if (kind_s == "unknown") rec.frame_kind = FrameKind::Unknown;
        else throw TraceError("unknown frame kind at line " + std::to_string(line_no));
        trace.push_back(rec);
    }
    return trace;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRecord>& trace) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write trace file: " + path.string());
    out << "index,timestamp_ns,frame_kind\n";
    for (const auto& rec : trace) {
        out << rec.index << ',' << rec.timestamp_ns << ',' << to_string(rec.frame_kind) << '\n';
    }
}

} // namespace safesim
