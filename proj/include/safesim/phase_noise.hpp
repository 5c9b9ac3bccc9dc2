#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace safesim {

// Per-cycle transient phase error: Gaussian(0, sigma) plus, with probability
// p_tail, a positive excursion drawn uniform(tail_min, tail_max). Box-Muller
// on explicit 53-bit uniforms so traces are bit-reproducible across
// platforms, unlike std::normal_distribution.
class PhaseNoise {
public:
    struct Params {
        double sigma_us = 0.0;
        double p_tail = 0.0;
        double tail_min_us = 50.0;
        double tail_max_us = 350.0;
    };

    explicit PhaseNoise(std::uint64_t seed) : rng_(seed) {}

    double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    double gaussian() {
        double u1 = uniform01();
        while (u1 == 0.0) u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // One draw per control cycle, in nanoseconds.
    double draw_ns(const Params& p) {
        double phase_ns = gaussian() * p.sigma_us * 1000.0;
        if (p.p_tail > 0.0 && uniform01() < p.p_tail) {
            phase_ns += (p.tail_min_us + uniform01() * (p.tail_max_us - p.tail_min_us)) * 1000.0;
        }
        return phase_ns;
    }

private:
    std::mt19937_64 rng_;
};

// The two regimes exercised by the acceptance scenarios.
inline PhaseNoise::Params isolated_profile() { return {2.0, 0.0, 50.0, 350.0}; }
inline PhaseNoise::Params contended_profile() { return {10.0, 0.02, 50.0, 350.0}; }

} // namespace safesim
