#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "linalg.hpp"
#include "model.hpp"

namespace sublqg {

enum class NoiseSignal : std::uint64_t { InitialState = 1, Process = 2, Measurement = 3 };

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Stream key as a pure function of (seed, run, signal, t). Every profile
/// simulated with the same seed sees the same draws for the same run.
[[nodiscard]] inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t run,
                                              NoiseSignal signal, std::uint64_t t) {
    std::uint64_t h = detail::splitmix64(seed);
    h = detail::splitmix64(h ^ run);
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(signal));
    return detail::splitmix64(h ^ t);
}

[[nodiscard]] inline Vec standard_normal(std::uint64_t key, Index dim) {
    std::mt19937_64 engine(key);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec z(dim);
    for (Index k = 0; k < dim; ++k) z(k) = normal(engine);
    return z;
}

/// Square-root factors of the model covariances, computed once per model.
struct NoiseFactors {
    Mat x;
    Mat w;
    Mat v;

    explicit NoiseFactors(const SystemModel& m)
        : x(linalg::psd_factor(m.sigma_x)),
          w(linalg::psd_factor(m.sigma_w)),
          v(m.sigma_v ? linalg::psd_factor(*m.sigma_v) : Mat()) {}
};

/// X_1, W_1..W_{T-1} and (output feedback) V_1..V_T for one run.
struct NoiseBundle {
    Vec x1;
    std::vector<Vec> w;
    std::vector<Vec> v;
    std::uint64_t seed = 0;
    std::uint64_t run = 0;
};

[[nodiscard]] inline NoiseBundle draw_noise(const SystemModel& m, const NoiseFactors& f,
                                            std::uint64_t seed, std::uint64_t run) {
    NoiseBundle b;
    b.seed = seed;
    b.run = run;
    const auto T = static_cast<std::uint64_t>(m.horizon);
    b.x1 = f.x * standard_normal(stream_key(seed, run, NoiseSignal::InitialState, 1), m.dx());
    for (std::uint64_t t = 1; t < T; ++t) {
        b.w.push_back(f.w * standard_normal(stream_key(seed, run, NoiseSignal::Process, t), m.dx()));
    }
    if (m.mode() == Mode::OutputFeedback) {
        for (std::uint64_t t = 1; t <= T; ++t) {
            b.v.push_back(f.v *
                          standard_normal(stream_key(seed, run, NoiseSignal::Measurement, t), m.dy()));
        }
    }
    return b;
}

[[nodiscard]] inline NoiseBundle draw_noise(const SystemModel& m, std::uint64_t seed,
                                            std::uint64_t run) {
    return draw_noise(m, NoiseFactors(m), seed, run);
}

}  // namespace sublqg
