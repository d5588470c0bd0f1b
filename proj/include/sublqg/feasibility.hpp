#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "linalg.hpp"
#include "model.hpp"
#include "sim.hpp"
#include "strategy.hpp"

namespace sublqg {

/// Controller `controller` changed its action at `t` when `signal`, which
/// lies outside its declared information set, was perturbed.
struct InfeasibleStrategy {
    Index controller;
    Index t;
    Signal signal;
    double change;
};

struct FeasibilityReport {
    std::vector<InfeasibleStrategy> violations;
    std::size_t perturbations = 0;
    double max_replay_error = 0.0;  // |replayed - recorded| action, should be ~0

    [[nodiscard]] bool feasible() const noexcept { return violations.empty(); }
};

inline constexpr double kFeasibilityTol = 1e-12;

namespace detail {

struct SignalRef {
    Signal signal;
    std::vector<Vec>* series;
    Index offset;
    Index width;
};

inline std::vector<SignalRef> enumerate_signals(const SystemModel& m, RunTrace& tr, Index t) {
    std::vector<SignalRef> out;
    for (Index tau = 1; tau <= t; ++tau) {
        const auto k = static_cast<std::size_t>(tau - 1);
        if (m.state_partition) {
            for (Index j = 0; j < m.n; ++j) {
                out.push_back({{SignalKind::X, j, tau}, &tr.x, m.state_partition->offset(j),
                               m.state_partition->size(j)});
            }
        } else {
            out.push_back({{SignalKind::X, kAllOwners, tau}, &tr.x, 0, tr.x[k].size()});
        }
        if (!tr.y.empty()) {
            const auto& op = *m.observation_partition;
            for (Index j = 0; j < m.n; ++j) {
                out.push_back({{SignalKind::Y, j, tau}, &tr.y, op.offset(j), op.size(j)});
            }
        }
        if (tau < t) {
            const auto& cp = m.controller_partition;
            for (Index j = 0; j < m.n; ++j) {
                out.push_back({{SignalKind::U, j, tau}, &tr.u, cp.offset(j), cp.size(j)});
            }
        }
    }
    return out;
}

// Feed the recorded signals 1..t to a fresh copy of the controller.
inline Vec replay(const Controller& proto, const RunTrace& tr, Index t) {
    auto c = proto.clone();
    Vec u;
    for (Index tau = 1; tau <= t; ++tau) {
        const auto k = static_cast<std::size_t>(tau - 1);
        StepInput in;
        in.t = tau;
        in.x = tr.x[k];
        if (!tr.y.empty()) in.y = tr.y[k];
        if (tau > 1) in.u_prev = tr.u[k - 1];
        u = c->act(in);
    }
    return u;
}

}  // namespace detail

/// Black-box check that each controller's action at each time is unchanged
/// when any signal outside its declared information set is perturbed on the
/// recorded trajectories. Signals are perturbed one at a time so every
/// dependence is attributed to a single (controller, t, signal).
[[nodiscard]] inline FeasibilityReport check_information_feasibility(
    const StrategyProfile& profile, const std::vector<RunTrace>& trajectories,
    std::uint64_t seed = 0) {
    const SystemModel& m = profile.design->model;
    const auto& cp = m.controller_partition;
    FeasibilityReport rep;
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    for (const auto& recorded : trajectories) {
        const Index T = static_cast<Index>(recorded.x.size());
        for (Index i = 0; i < profile.size(); ++i) {
            const Controller& proto = *profile.controllers[static_cast<std::size_t>(i)];
            const InformationSet& info = profile.declared[static_cast<std::size_t>(i)];
            for (Index t = 1; t <= T; ++t) {
                const Vec base = detail::replay(proto, recorded, t);
                const Vec logged = recorded.u[static_cast<std::size_t>(t - 1)].segment(cp.offset(i), cp.size(i));
                rep.max_replay_error = std::max(rep.max_replay_error, linalg::norm_inf(Vec(base - logged)));

                RunTrace work = recorded;
                for (const auto& ref : detail::enumerate_signals(m, work, t)) {
                    if (info.contains(ref.signal, t)) continue;
                    auto& v = (*ref.series)[static_cast<std::size_t>(ref.signal.time - 1)];
                    const Vec saved = v.segment(ref.offset, ref.width);
                    const double scale = 1.0 + linalg::norm_inf(saved);
                    for (Index k = 0; k < ref.width; ++k) v(ref.offset + k) += scale * (1.0 + std::abs(normal(engine)));
                    const Vec moved = detail::replay(proto, work, t);
                    v.segment(ref.offset, ref.width) = saved;
                    ++rep.perturbations;

                    const double change = linalg::norm_inf(Vec(moved - base));
                    if (change > kFeasibilityTol * (1.0 + linalg::norm_inf(base))) {
                        rep.violations.push_back({i, t, ref.signal, change});
                    }
                }
            }
        }
    }
    return rep;
}

}  // namespace sublqg
