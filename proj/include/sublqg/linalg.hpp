#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace sublqg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

namespace linalg {

/// Relative cutoff applied to singular values in `pinv`.
inline constexpr double kPinvRelTol = 1e-12;

// Induced infinity norm (max absolute row sum).
[[nodiscard]] inline double norm_inf(const Mat& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

[[nodiscard]] inline double norm_inf(const Vec& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

[[nodiscard]] inline double max_abs(const Mat& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

[[nodiscard]] inline double norm2(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

/// Moore-Penrose pseudo-inverse via SVD. Singular values at or below
/// `rel_tol * sigma_max` are treated as zero.
[[nodiscard]] inline Mat pinv(const Mat& m, double rel_tol = kPinvRelTol) {
    if (m.size() == 0) return Mat::Zero(m.cols(), m.rows());
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& s = svd.singularValues();
    const double cutoff = s(0) * rel_tol;
    Vec s_inv = Vec::Zero(s.size());
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (s(k) > cutoff) s_inv(k) = 1.0 / s(k);
    }
    return svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().transpose();
}

/// 2-norm condition number; +inf for a numerically singular square matrix.
[[nodiscard]] inline double condition_number(const Mat& m) {
    if (m.size() == 0) return 1.0;
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return s(0) / smin;
}

[[nodiscard]] inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

[[nodiscard]] inline double min_eigenvalue(const Mat& sym) {
    if (sym.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(sym), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// Symmetrize and clamp negative eigenvalues to zero.
[[nodiscard]] inline Mat psd_floor(const Mat& m) {
    if (m.size() == 0) return m;
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m));
    if (es.eigenvalues()(0) >= 0.0) return symmetrize(m);
    Vec lam = es.eigenvalues().cwiseMax(0.0);
    return symmetrize(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose());
}

/// F with F F^T = sigma, from the eigendecomposition with negative
/// eigenvalues clamped to zero. Accepts singular PSD input.
[[nodiscard]] inline Mat psd_factor(const Mat& sigma) {
    if (sigma.size() == 0) return sigma;
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(sigma));
    Vec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal();
}

/// Orthonormal basis of range(m), rank decided with the pinv tolerance.
[[nodiscard]] inline Mat range_basis(const Mat& m, double rel_tol = kPinvRelTol) {
    if (m.size() == 0) return Mat(m.rows(), 0);
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU);
    const Vec& s = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > s(0) * rel_tol) ++rank;
    return svd.matrixU().leftCols(rank);
}

/// Orthonormal basis of the orthogonal complement of range(m).
[[nodiscard]] inline Mat complement_basis(const Mat& m, double rel_tol = kPinvRelTol) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU);
    const Vec& s = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < s.size() && s(0) > 0.0 && s(rank) > s(0) * rel_tol) ++rank;
    return svd.matrixU().rightCols(m.rows() - rank);
}

[[nodiscard]] inline Mat vstack(const Mat& top, const Mat& bottom) {
    Mat out(top.rows() + bottom.rows(), top.cols());
    out.topRows(top.rows()) = top;
    out.bottomRows(bottom.rows()) = bottom;
    return out;
}

}  // namespace linalg
}  // namespace sublqg
