#pragma once

#include <optional>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "model.hpp"

namespace sublqg {

/// Centralized finite-horizon gains. Vectors are indexed from zero; entry k
/// holds time step t = k + 1. `P` has T + 1 entries with P[T] = 0.
struct GainSchedule {
    std::vector<Mat> K;
    std::vector<Mat> P;
    std::vector<bool> singular;  // pseudo-inverse fallback used at this step
    std::optional<Partition> state_partition;

    [[nodiscard]] Index horizon() const noexcept { return static_cast<Index>(K.size()); }
    [[nodiscard]] bool any_singular() const {
        for (bool s : singular)
            if (s) return true;
        return false;
    }
    [[nodiscard]] const Mat& gain(Index t) const { return K.at(static_cast<std::size_t>(t - 1)); }
    [[nodiscard]] const Mat& value(Index t) const { return P.at(static_cast<std::size_t>(t - 1)); }
};

/// Condition number beyond which the stage Hessian is inverted through the
/// pseudo-inverse and the step is flagged.
inline constexpr double kGainCondLimit = 1e12;

/// Backward Riccati recursion with the state/action cross term N^T M:
///   G_t = N^T N + B^T P_{t+1} B,  H_t = N^T M + B^T P_{t+1} A,
///   K_t = -G_t^+ H_t,  P_t = M^T M + A^T P_{t+1} A - H_t^T G_t^+ H_t.
/// When G_t is singular the minimum-norm stationary gain is returned.
[[nodiscard]] inline GainSchedule solve_centralized_lqr(const SystemModel& model) {
    const Index T = model.horizon;
    const Index dx = model.dx();
    GainSchedule s;
    s.state_partition = model.state_partition;
    s.K.resize(static_cast<std::size_t>(T));
    s.P.resize(static_cast<std::size_t>(T + 1));
    s.singular.resize(static_cast<std::size_t>(T));
    s.P[static_cast<std::size_t>(T)] = Mat::Zero(dx, dx);

    const Mat MtM = model.M.transpose() * model.M;
    const Mat NtN = model.N.transpose() * model.N;
    const Mat NtM = model.N.transpose() * model.M;
    for (Index k = T - 1; k >= 0; --k) {
        const Mat& next = s.P[static_cast<std::size_t>(k + 1)];
        const Mat G = linalg::symmetrize(NtN + model.B.transpose() * next * model.B);
        const Mat H = NtM + model.B.transpose() * next * model.A;

        Mat G_inv;
        const bool singular = linalg::condition_number(G) > kGainCondLimit;
        if (singular) {
            G_inv = linalg::pinv(G);
        } else {
            G_inv = G.ldlt().solve(Mat::Identity(G.rows(), G.cols()));
        }
        s.singular[static_cast<std::size_t>(k)] = singular;
        s.K[static_cast<std::size_t>(k)] = -G_inv * H;
        s.P[static_cast<std::size_t>(k)] =
            linalg::symmetrize(MtM + model.A.transpose() * next * model.A - H.transpose() * G_inv * H);
    }
    return s;
}

/// Column block K_t^i of K_t acting on subsystem state X^i (t is 1-based).
[[nodiscard]] inline Mat gain_block(const GainSchedule& s, Index t, Index i) {
    if (!s.state_partition) throw MissingPartition("gain_block needs a state partition");
    const auto& p = *s.state_partition;
    return s.gain(t).middleCols(p.offset(i), p.size(i));
}

}  // namespace sublqg
