#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <memory>
#include <thread>
#include <vector>

#include "kalman.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "noise.hpp"
#include "strategy.hpp"

namespace sublqg {

/// One closed-loop run. Vectors are indexed from zero (entry k is t = k + 1).
/// `z` is the centralized estimate and `s[k][i]` controller i's local
/// estimate, both driven by the actions actually applied; in state feedback
/// z = x and s^i embeds X^i.
struct RunTrace {
    std::uint64_t run = 0;
    std::vector<Vec> x;
    std::vector<Vec> u;
    std::vector<Vec> y;
    std::vector<Vec> z;
    std::vector<std::vector<Vec>> s;
    std::vector<double> cost;
    double total = 0.0;
    double estimate_residual = 0.0;      // max_t |Z_t - sum_i S_t^i|_inf / (1 + |Z_t|_inf)
    double superposition_residual = 0.0; // max_t |[B;N](u_t - K_t z_t)|_inf / (1 + |K_t z_t|_inf)
};

struct SimulationResult {
    ProfileKind kind = ProfileKind::Zero;
    std::uint64_t seed = 0;
    std::vector<RunTrace> runs;

    [[nodiscard]] double max_estimate_residual() const {
        double r = 0.0;
        for (const auto& t : runs) r = std::max(r, t.estimate_residual);
        return r;
    }
    [[nodiscard]] double max_superposition_residual() const {
        double r = 0.0;
        for (const auto& t : runs) r = std::max(r, t.superposition_residual);
        return r;
    }
    [[nodiscard]] std::vector<double> totals() const {
        std::vector<double> out;
        out.reserve(runs.size());
        for (const auto& t : runs) out.push_back(t.total);
        return out;
    }
};

/// X_{t+1} = A X_t + B U_t + W_t.
[[nodiscard]] inline Vec step_dynamics(const SystemModel& m, const Vec& x, const Vec& u, const Vec& w) {
    return m.A * x + m.B * u + w;
}

[[nodiscard]] inline double stage_cost(const SystemModel& m, const Vec& x, const Vec& u) {
    return (m.M * x + m.N * u).squaredNorm();
}

/// Closed-loop run of `profile` on the noise bundle drawn for (seed, run).
[[nodiscard]] inline RunTrace simulate_run(const StrategyProfile& profile, const NoiseFactors& factors,
                                           std::uint64_t seed, std::uint64_t run) {
    const Design& d = *profile.design;
    const SystemModel& m = d.model;
    const bool of = m.mode() == Mode::OutputFeedback;
    const Index T = m.horizon;
    const NoiseBundle noise = draw_noise(m, factors, seed, run);

    std::vector<std::unique_ptr<Controller>> ctl;
    ctl.reserve(profile.controllers.size());
    for (const auto& c : profile.controllers) ctl.push_back(c->clone());

    RunTrace tr;
    tr.run = run;
    Vec x = noise.x1;
    Vec u_prev;
    Vec z;
    std::vector<Vec> s(static_cast<std::size_t>(m.n));
    const auto& cp = m.controller_partition;

    for (Index t = 1; t <= T; ++t) {
        StepInput in;
        in.t = t;
        in.x = x;
        in.u_prev = u_prev;
        if (of) {
            in.y = *m.C * x + noise.v[static_cast<std::size_t>(t - 1)];
            const auto& op = *m.observation_partition;
            if (t == 1) {
                z = initial_estimate(*d.filter, in.y);
                for (Index i = 0; i < m.n; ++i) {
                    s[static_cast<std::size_t>(i)] =
                        local_estimate_init(d, i, in.y.segment(op.offset(i), op.size(i)));
                }
            } else {
                z = centralized_estimate_update(m, *d.filter, t - 1, z, u_prev, in.y);
                for (Index i = 0; i < m.n; ++i) {
                    auto& si = s[static_cast<std::size_t>(i)];
                    si = local_estimate_update(d, i, t - 1, si, u_prev.segment(cp.offset(i), cp.size(i)),
                                               in.y.segment(op.offset(i), op.size(i)));
                }
            }
        } else {
            z = x;
            if (m.state_partition) {
                const auto& sp = *m.state_partition;
                for (Index i = 0; i < m.n; ++i) {
                    s[static_cast<std::size_t>(i)] = embed_state_block(m, i, x.segment(sp.offset(i), sp.size(i)));
                }
            }
        }

        Vec u(m.du());
        for (Index i = 0; i < m.n; ++i) {
            u.segment(cp.offset(i), cp.size(i)) = ctl[static_cast<std::size_t>(i)]->act(in);
        }

        const double c = stage_cost(m, x, u);
        tr.cost.push_back(c);
        tr.total += c;

        if (of || m.state_partition) {
            Vec sum = Vec::Zero(m.dx());
            for (const auto& si : s) sum += si;
            tr.estimate_residual = std::max(
                tr.estimate_residual, linalg::norm_inf(Vec(z - sum)) / (1.0 + linalg::norm_inf(z)));
        }
        if (!profile.custom && is_decentralized(profile.kind)) {
            const Vec u_cen = d.gains.gain(t) * z;
            const Vec du = u - u_cen;
            const double r = std::max(linalg::norm_inf(Vec(m.B * du)), linalg::norm_inf(Vec(m.N * du)));
            tr.superposition_residual =
                std::max(tr.superposition_residual, r / (1.0 + linalg::norm_inf(u_cen)));
        }

        tr.x.push_back(x);
        tr.u.push_back(u);
        if (of) tr.y.push_back(in.y);
        tr.z.push_back(z);
        tr.s.push_back(s);

        if (t < T) x = step_dynamics(m, x, u, noise.w[static_cast<std::size_t>(t - 1)]);
        u_prev = std::move(u);
    }
    return tr;
}

/// `runs` independent runs numbered 0..runs-1. With `jobs` > 1 runs are
/// distributed over worker threads; the result is identical either way.
[[nodiscard]] inline SimulationResult simulate(const StrategyProfile& profile, std::uint64_t seed,
                                               std::uint32_t runs, unsigned jobs = 1) {
    const NoiseFactors factors(profile.design->model);
    SimulationResult res;
    res.kind = profile.kind;
    res.seed = seed;
    res.runs.resize(runs);

    jobs = std::max(1u, std::min<unsigned>(jobs, runs));
    if (jobs == 1) {
        for (std::uint32_t r = 0; r < runs; ++r) res.runs[r] = simulate_run(profile, factors, seed, r);
        return res;
    }
    std::atomic<std::uint32_t> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> workers;
    for (unsigned j = 0; j < jobs; ++j) {
        workers.emplace_back([&, j] {
            try {
                for (std::uint32_t r = next++; r < runs; r = next++) {
                    res.runs[r] = simulate_run(profile, factors, seed, r);
                }
            } catch (...) {
                errors[j] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return res;
}

}  // namespace sublqg
