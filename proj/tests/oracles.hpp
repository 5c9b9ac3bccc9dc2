#pragma once

// Independent reference implementations the tests check the library against.
// These are deliberately naive: bit-serial loops and straightforward
// statistics, never sharing code with the implementation under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace oracle {

// Bit-serial CRC-32C: Castagnoli polynomial, reflected input/output,
// init 0xFFFFFFFF, final xor 0xFFFFFFFF.
inline std::uint32_t crc32c_bitserial(std::span<const std::uint8_t> data) {
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::uint8_t byte : data) {
        crc ^= byte;
        for (int bit = 0; bit < 8; ++bit) {
            if (crc & 1u) {
                crc = (crc >> 1) ^ 0x82F63B78u; // reflected 0x1EDC6F41
            } else {
                crc >>= 1;
            }
        }
    }
    return crc ^ 0xFFFFFFFFu;
}

// Jitter statistics via direct loops.
struct JitterOracle {
    double nominal_us;
    double sigma_us;
    double p99_abs_us;
    double p999_abs_us;
    double max_abs_us;
    std::uint64_t excursion_count;
    std::uint64_t missed_cycles;
    std::uint64_t within_band;
    std::size_t cycles;
};

inline std::vector<std::uint64_t> delta2_bruteforce(const std::vector<std::uint64_t>& ts) {
    std::vector<std::uint64_t> out;
    for (std::size_t n = 2; n < ts.size(); ++n) out.push_back(ts[n] - ts[n - 2]);
    return out;
}

inline double percentile_interp(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(rank));
    if (lo == hi) return values[lo];
    return values[lo] * (1.0 - (rank - lo)) + values[hi] * (rank - lo);
}

inline JitterOracle jitter_bruteforce(const std::vector<std::uint64_t>& timestamps_ns,
                                      double excursion_us = 50.0, double missed_ms = 2.0,
                                      double band_us = 10.0) {
    const auto d2 = delta2_bruteforce(timestamps_ns);
    std::vector<double> periods;
    for (auto d : d2) periods.push_back(static_cast<double>(d) / 1000.0);

    std::vector<double> sorted = periods;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double nominal =
        m % 2 == 1 ? sorted[m / 2] : (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0;

    std::vector<double> jitter;
    for (double p : periods) jitter.push_back(p - nominal);

    double mean = 0.0;
    for (double j : jitter) mean += j;
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (double j : jitter) var += (j - mean) * (j - mean);
    var /= static_cast<double>(m); // population

    std::vector<double> abs_jitter;
    for (double j : jitter) abs_jitter.push_back(std::abs(j));

    JitterOracle result{};
    result.cycles = m;
    result.nominal_us = nominal;
    result.sigma_us = std::sqrt(var);
    result.p99_abs_us = percentile_interp(abs_jitter, 99.0);
    result.p999_abs_us = percentile_interp(abs_jitter, 99.9);
    result.max_abs_us = *std::max_element(abs_jitter.begin(), abs_jitter.end());
    for (std::size_t i = 0; i < m; ++i) {
        if (abs_jitter[i] > excursion_us) result.excursion_count += 1;
        if (abs_jitter[i] <= band_us) result.within_band += 1;
        if (periods[i] > missed_ms * 1000.0) result.missed_cycles += 1;
    }
    return result;
}

} // namespace oracle
