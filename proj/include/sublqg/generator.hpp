#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "errors.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "substitution.hpp"

namespace sublqg {

struct GeneratorOptions {
    Index dx = 3;
    Index dc = 4;
    Index w = 2;           // action width of every controller
    Index n = 2;
    Index obs_rows = 1;    // observation rows per controller; 0 gives a state-feedback model
    Index horizon = 10;
    std::uint64_t seed = 0;
};

namespace detail {

class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    Mat matrix(Index rows, Index cols) {
        Mat m(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) m(i, j) = normal_(engine_);
        return m;
    }

    Mat spd(Index dim, double scale) {
        Mat g = matrix(dim, dim);
        return linalg::symmetrize(scale * (g * g.transpose() / static_cast<double>(dim) +
                                           0.1 * Mat::Identity(dim, dim)));
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double spectral_radius(const Mat& a) {
    Eigen::EigenSolver<Mat> es(a, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Random model satisfying the substitutability condition by construction:
/// B^i = B^1 R^i and N^i = N^1 R^i with invertible mixers R^i (R^1 = I) and
/// [B^1; N^1] of full column rank. Deterministic in the options.
[[nodiscard]] inline SystemModel generate_substitutable(const GeneratorOptions& opt) {
    if (opt.dx < 1 || opt.dc < 1 || opt.w < 1 || opt.n < 1 || opt.horizon < 1 || opt.obs_rows < 0) {
        throw std::invalid_argument("generator dimensions must be positive");
    }
    constexpr int kMaxRetries = 100;
    constexpr double kMaxCond = 1e4;

    detail::GaussianSource rng(opt.seed);
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        SystemModel m;
        m.n = opt.n;
        m.horizon = opt.horizon;

        m.A = rng.matrix(opt.dx, opt.dx);
        const double rho = detail::spectral_radius(m.A);
        if (rho > 0.0) m.A *= 0.9 / rho;

        const Mat b1 = rng.matrix(opt.dx, opt.w);
        const Mat n1 = rng.matrix(opt.dc, opt.w);
        if (linalg::condition_number(linalg::vstack(b1, n1)) > kMaxCond) continue;

        m.B.resize(opt.dx, opt.w * opt.n);
        m.N.resize(opt.dc, opt.w * opt.n);
        bool mixers_ok = true;
        for (Index i = 0; i < opt.n; ++i) {
            Mat r = Mat::Identity(opt.w, opt.w);
            if (i > 0) {
                r = rng.matrix(opt.w, opt.w);
                if (linalg::condition_number(r) > kMaxCond) mixers_ok = false;
            }
            m.B.middleCols(i * opt.w, opt.w) = b1 * r;
            m.N.middleCols(i * opt.w, opt.w) = n1 * r;
        }
        if (!mixers_ok) continue;
        m.controller_partition = Partition::uniform(opt.n, opt.w);

        m.M = rng.matrix(opt.dc, opt.dx);
        if (opt.dx >= opt.n) {
            std::vector<Index> sizes(static_cast<std::size_t>(opt.n), opt.dx / opt.n);
            for (Index k = 0; k < opt.dx % opt.n; ++k) ++sizes[static_cast<std::size_t>(k)];
            m.state_partition = Partition(std::move(sizes));
        }
        m.sigma_x = rng.spd(opt.dx, 1.0);
        m.sigma_w = rng.spd(opt.dx, 0.5);
        if (opt.obs_rows > 0) {
            m.C = rng.matrix(opt.obs_rows * opt.n, opt.dx);
            m.observation_partition = Partition::uniform(opt.n, opt.obs_rows);
            m.sigma_v = rng.spd(opt.obs_rows * opt.n, 0.5);
        }

        if (!check_substitutable(m).substitutable()) continue;
        return validate_model(std::move(m));
    }
    throw RankFailure("generator could not meet rank conditions after " +
                      std::to_string(kMaxRetries) + " attempts");
}

}  // namespace sublqg
