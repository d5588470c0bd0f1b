#pragma once

#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "model.hpp"

namespace sublqg {

/// Per-controller substitution maps and the verdict on whether each
/// controller alone can reproduce any joint action's effect on both the
/// dynamics (B u) and the cost output (N u).
struct SubstitutionSet {
    std::vector<Mat> lambdas;       // Lambda^i, d_u^i x d_u
    std::vector<double> residuals;  // max_j |[B;N] e_j - [B^i;N^i] Lambda^i e_j|_inf
    std::vector<bool> substitutable_each;
    double tolerance = 0.0;

    [[nodiscard]] bool substitutable() const {
        for (bool b : substitutable_each)
            if (!b) return false;
        return !substitutable_each.empty();
    }
    [[nodiscard]] bool substitutable(Index i) const {
        return substitutable_each.at(static_cast<std::size_t>(i));
    }
    [[nodiscard]] const Mat& lambda(Index i) const {
        return lambdas.at(static_cast<std::size_t>(i));
    }
    [[nodiscard]] Index size() const { return static_cast<Index>(lambdas.size()); }
};

/// 1e-8 * (1 + |[B;N]|_inf).
[[nodiscard]] inline double substitution_tolerance(const SystemModel& model) {
    return 1e-8 * (1.0 + linalg::norm_inf(model.actuation()));
}

/// Lambda^i = pinv([B^i; N^i]) [B; N]: the minimum-norm action for
/// controller i that matches the joint action's B u and N u.
[[nodiscard]] inline Mat substitution_map(const SystemModel& model, Index i) {
    if (i < 0 || i >= model.n) throw std::out_of_range("controller index out of range");
    return linalg::pinv(model.actuation_block(i)) * model.actuation();
}

[[nodiscard]] inline SubstitutionSet check_substitutable(const SystemModel& model) {
    SubstitutionSet out;
    out.tolerance = substitution_tolerance(model);
    const Mat joint = model.actuation();
    for (Index i = 0; i < model.n; ++i) {
        Mat lam = substitution_map(model, i);
        const double r = linalg::max_abs(Mat(joint - model.actuation_block(i) * lam));
        out.lambdas.push_back(std::move(lam));
        out.residuals.push_back(r);
        out.substitutable_each.push_back(r <= out.tolerance);
    }
    return out;
}

/// v^i = Lambda^i u. Throws NotSubstitutable when controller i cannot
/// stand in for the joint action.
[[nodiscard]] inline Vec apply_substitution(const SubstitutionSet& subs, const Vec& u, Index i) {
    if (!subs.substitutable(i)) {
        throw NotSubstitutable("controller " + std::to_string(i + 1) +
                               " cannot substitute for the joint action (residual " +
                               std::to_string(subs.residuals.at(static_cast<std::size_t>(i))) +
                               ")");
    }
    return subs.lambda(i) * u;
}

inline void require_substitutable(const SubstitutionSet& subs) {
    for (Index i = 0; i < subs.size(); ++i) {
        if (!subs.substitutable(i)) {
            throw NotSubstitutable("controller " + std::to_string(i + 1) +
                                   " fails the substitution residual test");
        }
    }
}

}  // namespace sublqg
