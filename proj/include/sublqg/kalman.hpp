#pragma once

#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "model.hpp"

namespace sublqg {

/// Centralized filter gains L_t (d_x x d_y) and posterior covariances
/// Sigma_t, indexed from zero (entry k is time t = k + 1).
struct FilterSchedule {
    std::vector<Mat> L;
    std::vector<Mat> Sigma;
    Partition observation_partition;

    [[nodiscard]] Index horizon() const noexcept { return static_cast<Index>(L.size()); }
    [[nodiscard]] const Mat& gain(Index t) const { return L.at(static_cast<std::size_t>(t - 1)); }
    [[nodiscard]] const Mat& covariance(Index t) const {
        return Sigma.at(static_cast<std::size_t>(t - 1));
    }
    /// Column block L_t^i, the weight on controller i's own observations.
    [[nodiscard]] Mat gain_block(Index t, Index i) const {
        return gain(t).middleCols(observation_partition.offset(i), observation_partition.size(i));
    }
};

inline constexpr double kInnovationCondLimit = 1e12;

namespace detail {

// prior C^T (C prior C^T + Sigma_v)^{-1} via LDL^T of the innovation covariance.
inline Mat kalman_gain(const Mat& prior, const Mat& C, const Mat& sigma_v, Index step) {
    const Mat S = linalg::symmetrize(C * prior * C.transpose() + sigma_v);
    if (linalg::condition_number(S) > kInnovationCondLimit) {
        throw SingularInnovation("innovation covariance is singular at t=" + std::to_string(step));
    }
    // L = prior C^T S^{-1}  <=>  S L^T = C prior
    return S.ldlt().solve(C * prior).transpose();
}

}  // namespace detail

/// Forward covariance recursion. The first update conditions the prior
/// Sigma_x on Y_1; later steps use the one-step prior A Sigma_t A^T + Sigma_w.
[[nodiscard]] inline FilterSchedule solve_kalman(const SystemModel& model) {
    if (model.mode() != Mode::OutputFeedback) {
        throw ModeMismatch("solve_kalman needs an output-feedback model (C present)");
    }
    const Mat& C = *model.C;
    const Mat& sigma_v = *model.sigma_v;
    const Mat I = Mat::Identity(model.dx(), model.dx());

    FilterSchedule f;
    f.observation_partition = *model.observation_partition;
    Mat prior = model.sigma_x;
    for (Index t = 1; t <= model.horizon; ++t) {
        if (t > 1) {
            prior = model.A * f.Sigma.back() * model.A.transpose() + model.sigma_w;
        }
        Mat L = detail::kalman_gain(prior, C, sigma_v, t);
        f.Sigma.push_back(linalg::psd_floor((I - L * C) * prior));
        f.L.push_back(std::move(L));
    }
    return f;
}

/// Z_1 = L_1 Y_1.
[[nodiscard]] inline Vec initial_estimate(const FilterSchedule& f, const Vec& y1) {
    return f.gain(1) * y1;
}

/// Z_{t+1} = (I - L_{t+1} C)(A Z_t + B U_t) + L_{t+1} Y_{t+1}; `t` is the
/// time index of z_t.
[[nodiscard]] inline Vec centralized_estimate_update(const SystemModel& model,
                                                     const FilterSchedule& f, Index t,
                                                     const Vec& z, const Vec& u, const Vec& y_next) {
    const Mat& L = f.gain(t + 1);
    const Vec predicted = model.A * z + model.B * u;
    return predicted - L * (*model.C * predicted) + L * y_next;
}

}  // namespace sublqg
