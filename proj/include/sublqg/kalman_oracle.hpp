#pragma once

#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "model.hpp"

namespace sublqg {

/// E[X_t | Y_{1:t}] computed without any recursion: X_t and the stacked
/// observations are written as affine maps of the primitive Gaussian vector
/// (X_1, W_{1:t-1}, V_{1:t}), and the conditional mean comes from a single
/// linear solve against the joint covariance. Controls are known constants.
/// `controls` holds u_1..u_{t-1}; `observations` holds y_1..y_t.
[[nodiscard]] inline Vec batch_conditioning_oracle(const SystemModel& model,
                                                   const std::vector<Vec>& controls,
                                                   const std::vector<Vec>& observations) {
    if (model.mode() != Mode::OutputFeedback) {
        throw ModeMismatch("batch_conditioning_oracle needs an output-feedback model");
    }
    const Index t = static_cast<Index>(observations.size());
    if (t < 1 || t > model.horizon || static_cast<Index>(controls.size()) != t - 1) {
        throw std::invalid_argument("need t observations and t-1 controls with 1 <= t <= T");
    }
    const Index dx = model.dx();
    const Index dy = model.dy();
    const Mat& C = *model.C;

    // primitive layout: [X_1 | W_1 .. W_{t-1} | V_1 .. V_t]
    const Index w_off = dx;
    const Index v_off = dx + (t - 1) * dx;
    const Index dim = v_off + t * dy;
    Mat cov = Mat::Zero(dim, dim);
    cov.block(0, 0, dx, dx) = model.sigma_x;
    for (Index k = 0; k < t - 1; ++k) cov.block(w_off + k * dx, w_off + k * dx, dx, dx) = model.sigma_w;
    for (Index k = 0; k < t; ++k) cov.block(v_off + k * dy, v_off + k * dy, dy, dy) = *model.sigma_v;

    Vec mean_x = Vec::Zero(dx);
    Mat map_x = Mat::Zero(dx, dim);
    map_x.block(0, 0, dx, dx).setIdentity();

    Vec mean_y(t * dy);
    Mat map_y = Mat::Zero(t * dy, dim);
    Vec y_stack(t * dy);
    for (Index k = 0; k < t; ++k) {
        if (k > 0) {
            mean_x = model.A * mean_x + model.B * controls[static_cast<std::size_t>(k - 1)];
            map_x = model.A * map_x;
            map_x.block(0, w_off + (k - 1) * dx, dx, dx) += Mat::Identity(dx, dx);
        }
        mean_y.segment(k * dy, dy) = C * mean_x;
        map_y.middleRows(k * dy, dy) = C * map_x;
        map_y.block(k * dy, v_off + k * dy, dy, dy) += Mat::Identity(dy, dy);
        y_stack.segment(k * dy, dy) = observations[static_cast<std::size_t>(k)];
    }

    const Mat cov_yy = linalg::symmetrize(map_y * cov * map_y.transpose());
    const Mat cov_xy = map_x * cov * map_y.transpose();
    if (linalg::condition_number(cov_yy) > 1e12) {
        throw SingularObservationCovariance("stacked observation covariance is singular at t=" +
                                            std::to_string(t));
    }
    return mean_x + cov_xy * cov_yy.ldlt().solve(y_stack - mean_y);
}

}  // namespace sublqg
