#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "sim.hpp"
#include "strategy.hpp"

namespace sublqg {

/// Closed loop of a linear profile written on the augmented state
/// xi = (X; e^1; ...; e^m), where e^k are the estimator states the profile
/// carries (none for state feedback, Z for centralized output feedback,
/// S^1..S^n for decentralized output feedback):
///   xi_1     = init_x X_1 + init_v V_1
///   xi_{t+1} = F_t xi_t + G_t W_t + H_t V_{t+1}
///   M X_t + N U_t = Q_t xi_t
struct ClosedLoopForm {
    Mat init_x;
    Mat init_v;
    std::vector<Mat> F;
    std::vector<Mat> G;
    std::vector<Mat> H;
    std::vector<Mat> Q;
};

namespace detail {

// Direct state-feedback map u_t = D_t x_t for the SF kinds.
inline Mat state_feedback_map(const Design& d, ProfileKind kind, Index t) {
    const SystemModel& m = d.model;
    switch (kind) {
        case ProfileKind::CentralizedSF: return d.gains.gain(t);
        case ProfileKind::DecentralizedSF: {
            const auto& cp = m.controller_partition;
            const auto& sp = *m.state_partition;
            Mat D = Mat::Zero(m.du(), m.dx());
            for (Index i = 0; i < m.n; ++i) {
                D.block(cp.offset(i), sp.offset(i), cp.size(i), sp.size(i)) =
                    d.subs.lambda(i) * gain_block(d.gains, t, i);
            }
            return D;
        }
        default: return Mat::Zero(m.du(), m.dx());
    }
}

}  // namespace detail

[[nodiscard]] inline ClosedLoopForm closed_loop_form(const StrategyProfile& profile) {
    if (profile.custom) throw NonlinearProfile("no closed-form structure for a custom profile");
    const Design& d = *profile.design;
    const SystemModel& m = d.model;
    const Index dx = m.dx();
    const Index dy = m.dy();
    const Index T = m.horizon;
    const Mat I = Mat::Identity(dx, dx);

    // Estimator bank: joint action u = sum_k J_k(t) e^k; estimator k ingests
    // P_k Y (its own observation rows) and its own action contribution.
    std::vector<Mat> proj;
    std::vector<std::function<Mat(Index)>> action;
    if (profile.kind == ProfileKind::CentralizedOF) {
        proj.push_back(Mat::Identity(dy, dy));
        action.emplace_back([&d](Index t) { return d.gains.gain(t); });
    } else if (profile.kind == ProfileKind::DecentralizedOF) {
        const auto& op = *m.observation_partition;
        const auto& cp = m.controller_partition;
        for (Index i = 0; i < m.n; ++i) {
            Mat P = Mat::Zero(dy, dy);
            P.block(op.offset(i), op.offset(i), op.size(i), op.size(i)).setIdentity();
            proj.push_back(std::move(P));
            action.emplace_back([&d, &m, &cp, i](Index t) {
                Mat J = Mat::Zero(m.du(), m.dx());
                J.middleRows(cp.offset(i), cp.size(i)) = d.subs.lambda(i) * d.gains.gain(t);
                return J;
            });
        }
    }
    const Index bank = static_cast<Index>(proj.size());
    const Index dim = dx * (1 + bank);

    ClosedLoopForm f;
    f.init_x = Mat::Zero(dim, dx);
    f.init_x.topRows(dx) = I;
    f.init_v = Mat::Zero(dim, dy);
    for (Index k = 0; k < bank; ++k) {
        const Mat& L1 = d.filter->gain(1);
        f.init_x.middleRows(dx * (1 + k), dx) = L1 * proj[static_cast<std::size_t>(k)] * *m.C;
        f.init_v.middleRows(dx * (1 + k), dx) = L1 * proj[static_cast<std::size_t>(k)];
    }

    for (Index t = 1; t <= T; ++t) {
        // U_t = [D_t, J_1, ..., J_m] xi_t
        Mat U = Mat::Zero(m.du(), dim);
        U.leftCols(dx) = detail::state_feedback_map(d, profile.kind, t);
        std::vector<Mat> J;
        for (Index k = 0; k < bank; ++k) {
            J.push_back(action[static_cast<std::size_t>(k)](t));
            U.middleCols(dx * (1 + k), dx) = J.back();
        }
        Mat Qt = m.N * U;
        Qt.leftCols(dx) += m.M;
        f.Q.push_back(std::move(Qt));
        if (t == T) break;

        // X_{t+1} = [A + B D_t, B J_1, ...] xi + W
        const Mat x_row = [&] {
            Mat r = m.B * U;
            r.leftCols(dx) += m.A;
            return r;
        }();
        Mat F = Mat::Zero(dim, dim);
        Mat G = Mat::Zero(dim, dx);
        Mat H = Mat::Zero(dim, dy);
        F.topRows(dx) = x_row;
        G.topRows(dx) = I;
        if (bank > 0) {
            const Mat& L = d.filter->gain(t + 1);
            const Mat correction = I - L * *m.C;
            for (Index k = 0; k < bank; ++k) {
                const Mat LPk = L * proj[static_cast<std::size_t>(k)];
                const Index row = dx * (1 + k);
                // e^k_{t+1} = (I - LC)(A + B J_k) e^k + L P_k (C X_{t+1} + V_{t+1})
                F.middleRows(row, dx) = LPk * *m.C * x_row;
                F.block(row, row, dx, dx) += correction * (m.A + m.B * J[static_cast<std::size_t>(k)]);
                G.middleRows(row, dx) = LPk * *m.C;
                H.middleRows(row, dx) = LPk;
            }
        }
        f.F.push_back(std::move(F));
        f.G.push_back(std::move(G));
        f.H.push_back(std::move(H));
    }
    return f;
}

/// Expected total cost sum_t trace(Q_t Cov(xi_t) Q_t^T), with Cov(xi_t)
/// propagated exactly through the closed-loop form.
[[nodiscard]] inline double exact_expected_cost(const StrategyProfile& profile) {
    const SystemModel& m = profile.design->model;
    const ClosedLoopForm f = closed_loop_form(profile);
    Mat cov = f.init_x * m.sigma_x * f.init_x.transpose();
    if (m.sigma_v) cov += f.init_v * *m.sigma_v * f.init_v.transpose();
    double total = 0.0;
    for (std::size_t k = 0; k < f.Q.size(); ++k) {
        cov = linalg::symmetrize(cov);
        total += (f.Q[k] * cov * f.Q[k].transpose()).trace();
        if (k < f.F.size()) {
            Mat next = f.F[k] * cov * f.F[k].transpose() + f.G[k] * m.sigma_w * f.G[k].transpose();
            if (m.sigma_v) next += f.H[k] * *m.sigma_v * f.H[k].transpose();
            cov = std::move(next);
        }
    }
    return std::max(total, 0.0);
}

struct MonteCarloEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint32_t runs = 0;
};

[[nodiscard]] inline MonteCarloEstimate summarize_samples(const std::vector<double>& samples) {
    if (samples.size() < 2) throw std::invalid_argument("at least two runs are required");
    const auto n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n;
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    MonteCarloEstimate e;
    e.mean = mean;
    e.standard_error = std::sqrt(ss / (n - 1.0) / n);
    e.ci_low = mean - 1.96 * e.standard_error;
    e.ci_high = mean + 1.96 * e.standard_error;
    e.runs = static_cast<std::uint32_t>(samples.size());
    return e;
}

[[nodiscard]] inline MonteCarloEstimate monte_carlo_cost(const StrategyProfile& profile,
                                                         std::uint64_t seed, std::uint32_t runs,
                                                         unsigned jobs = 1) {
    if (runs < 2) throw std::invalid_argument("at least two runs are required");
    return summarize_samples(simulate(profile, seed, runs, jobs).totals());
}

inline constexpr double kPathwiseRelTol = 1e-8;
inline constexpr double kExactRelTol = 1e-9;

struct ProfileCost {
    ProfileKind kind = ProfileKind::Zero;
    double exact = 0.0;
    MonteCarloEstimate monte_carlo;
};

/// Centralized vs decentralized (vs zero baseline) under common noise.
struct CostReport {
    Mode mode = Mode::StateFeedback;
    std::uint64_t seed = 0;
    std::uint32_t runs = 0;
    bool substitutable = false;
    std::vector<double> substitution_residuals;
    std::optional<std::string> refusal;  // set when the decentralized side was not built

    ProfileCost centralized;
    std::optional<ProfileCost> decentralized;
    ProfileCost zero;

    double pathwise_max_rel_gap = 0.0;  // max_run |J_dec - J_cen| / (1 + J_cen)
    double exact_rel_gap = 0.0;         // |E_dec - E_cen| / max(E_dec, E_cen)
    double estimate_residual_max = 0.0;
    double superposition_residual_max = 0.0;
    std::vector<std::array<double, 3>> paired;  // per run: centralized, decentralized, zero

    bool pathwise_equal = false;
    bool exact_equal = false;
    bool lower_bound_holds = false;
    bool baseline_strictly_worse = false;
};

[[nodiscard]] inline double relative_gap(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

[[nodiscard]] inline CostReport compare(const std::shared_ptr<const Design>& design, std::uint64_t seed,
                                        std::uint32_t runs, unsigned jobs = 1) {
    const Mode mode = design->model.mode();
    CostReport rep;
    rep.mode = mode;
    rep.seed = seed;
    rep.runs = runs;
    rep.substitutable = design->subs.substitutable();
    rep.substitution_residuals = design->subs.residuals;

    const auto cen = make_profile(design, centralized_kind(mode));
    const auto zero = make_profile(design, ProfileKind::Zero);
    const auto cen_sim = simulate(cen, seed, runs, jobs);
    const auto zero_sim = simulate(zero, seed, runs, jobs);
    rep.centralized = {cen.kind, exact_expected_cost(cen), summarize_samples(cen_sim.totals())};
    rep.zero = {zero.kind, exact_expected_cost(zero), summarize_samples(zero_sim.totals())};

    const double lb_scale = std::max(1.0, rep.centralized.exact);
    rep.baseline_strictly_worse = rep.zero.exact > rep.centralized.exact + kExactRelTol * lb_scale;
    rep.lower_bound_holds = rep.zero.exact >= rep.centralized.exact - kExactRelTol * lb_scale;

    if (!rep.substitutable) {
        rep.refusal = "NotSubstitutable";
        for (std::uint32_t r = 0; r < runs; ++r) {
            rep.paired.push_back({cen_sim.runs[r].total, std::nan(""), zero_sim.runs[r].total});
        }
        return rep;
    }

    const auto dec = make_profile(design, decentralized_kind(mode));
    const auto dec_sim = simulate(dec, seed, runs, jobs);
    rep.decentralized = ProfileCost{dec.kind, exact_expected_cost(dec), summarize_samples(dec_sim.totals())};

    for (std::uint32_t r = 0; r < runs; ++r) {
        const double jc = cen_sim.runs[r].total;
        const double jd = dec_sim.runs[r].total;
        rep.pathwise_max_rel_gap = std::max(rep.pathwise_max_rel_gap, std::abs(jd - jc) / (1.0 + jc));
        rep.paired.push_back({jc, jd, zero_sim.runs[r].total});
    }
    rep.exact_rel_gap = relative_gap(rep.decentralized->exact, rep.centralized.exact);
    rep.estimate_residual_max = std::max(cen_sim.max_estimate_residual(), dec_sim.max_estimate_residual());
    rep.superposition_residual_max = dec_sim.max_superposition_residual();

    rep.pathwise_equal = rep.pathwise_max_rel_gap <= kPathwiseRelTol;
    rep.exact_equal = rep.exact_rel_gap <= kExactRelTol;
    rep.lower_bound_holds = rep.lower_bound_holds &&
                            rep.decentralized->exact >= rep.centralized.exact - kExactRelTol * lb_scale;
    return rep;
}

}  // namespace sublqg
