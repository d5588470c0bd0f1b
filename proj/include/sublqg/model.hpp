#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace sublqg {

using Index = Eigen::Index;

/// Contiguous block widths splitting one vector dimension among owners.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<Index> sizes) : sizes_(std::move(sizes)) {}

    static Partition uniform(Index blocks, Index width) {
        return Partition(std::vector<Index>(static_cast<std::size_t>(blocks), width));
    }

    [[nodiscard]] const std::vector<Index>& sizes() const noexcept { return sizes_; }
    [[nodiscard]] Index blocks() const noexcept { return static_cast<Index>(sizes_.size()); }
    [[nodiscard]] Index total() const noexcept {
        return std::accumulate(sizes_.begin(), sizes_.end(), Index{0});
    }
    [[nodiscard]] Index size(Index i) const { return sizes_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] Index offset(Index i) const {
        return std::accumulate(sizes_.begin(), sizes_.begin() + i, Index{0});
    }

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<Index> sizes_;
};

enum class Mode { StateFeedback, OutputFeedback };

/// Linear-Gaussian system X_{t+1} = A X_t + B U_t + W_t with stage cost
/// |M X_t + N U_t|^2, optionally observed through Y_t = C X_t + V_t.
/// Controller i owns the column blocks B^i, N^i and (output feedback) the
/// row block C^i.
struct SystemModel {
    Mat A;
    Mat B;
    Mat M;
    Mat N;
    Partition controller_partition;
    std::optional<Partition> state_partition;
    std::optional<Mat> C;
    std::optional<Partition> observation_partition;
    Mat sigma_x;
    Mat sigma_w;
    std::optional<Mat> sigma_v;
    Index horizon = 1;
    Index n = 1;

    [[nodiscard]] Index dx() const noexcept { return A.rows(); }
    [[nodiscard]] Index du() const noexcept { return B.cols(); }
    [[nodiscard]] Index dc() const noexcept { return M.rows(); }
    [[nodiscard]] Index dy() const noexcept { return C ? C->rows() : 0; }
    [[nodiscard]] Mode mode() const noexcept {
        return C ? Mode::OutputFeedback : Mode::StateFeedback;
    }

    [[nodiscard]] Mat B_block(Index i) const {
        return B.middleCols(controller_partition.offset(i), controller_partition.size(i));
    }
    [[nodiscard]] Mat N_block(Index i) const {
        return N.middleCols(controller_partition.offset(i), controller_partition.size(i));
    }
    /// [B; N], the joint actuation map onto dynamics and cost.
    [[nodiscard]] Mat actuation() const { return linalg::vstack(B, N); }
    [[nodiscard]] Mat actuation_block(Index i) const {
        return linalg::vstack(B_block(i), N_block(i));
    }

    /// Same system with the observation channel removed.
    [[nodiscard]] SystemModel state_feedback_view() const {
        SystemModel out = *this;
        out.C.reset();
        out.sigma_v.reset();
        out.observation_partition.reset();
        return out;
    }

    friend bool operator==(const SystemModel& a, const SystemModel& b) {
        const auto same = [](const Mat& x, const Mat& y) {
            return x.rows() == y.rows() && x.cols() == y.cols() && x.cwiseEqual(y).all();
        };
        const auto same_opt = [&](const std::optional<Mat>& x, const std::optional<Mat>& y) {
            return x.has_value() == y.has_value() && (!x || same(*x, *y));
        };
        return same(a.A, b.A) && same(a.B, b.B) && same(a.M, b.M) && same(a.N, b.N) &&
               a.controller_partition == b.controller_partition &&
               a.state_partition == b.state_partition && same_opt(a.C, b.C) &&
               a.observation_partition == b.observation_partition &&
               same(a.sigma_x, b.sigma_x) && same(a.sigma_w, b.sigma_w) &&
               same_opt(a.sigma_v, b.sigma_v) && a.horizon == b.horizon && a.n == b.n;
    }
};

inline constexpr double kSymmetryRelTol = 1e-12;
inline constexpr double kPsdRelTol = 1e-10;

namespace detail {

inline void check_covariance(std::vector<Violation>& out, const Mat& s, Index dim,
                             const std::string& field) {
    if (s.rows() != dim || s.cols() != dim) {
        out.push_back({"DimensionMismatch", field,
                       "expected " + std::to_string(dim) + "x" + std::to_string(dim) + ", got " +
                           std::to_string(s.rows()) + "x" + std::to_string(s.cols())});
        return;
    }
    if (!s.allFinite()) {
        out.push_back({"NotFinite", field, "non-finite entry"});
        return;
    }
    const double scale = linalg::norm_inf(s);
    if (linalg::norm_inf(Mat(s - s.transpose())) > kSymmetryRelTol * scale) {
        out.push_back({"NotSymmetric", field, "asymmetry exceeds 1e-12 relative"});
        return;
    }
    const double lam = linalg::min_eigenvalue(s);
    if (lam < -kPsdRelTol * linalg::norm2(s)) {
        out.push_back({"NotPSD", field, "minimum eigenvalue " + std::to_string(lam)});
    }
}

inline void check_partition(std::vector<Violation>& out, const Partition& p, Index n,
                            Index total, const std::string& field) {
    if (p.blocks() != n) {
        out.push_back({"PartitionArity", field,
                       std::to_string(p.blocks()) + " blocks but n=" + std::to_string(n)});
    }
    for (Index s : p.sizes()) {
        if (s < 1) {
            out.push_back({"DimensionMismatch", field, "block width must be >= 1"});
            return;
        }
    }
    if (p.total() != total) {
        out.push_back({"DimensionMismatch", field,
                       "blocks sum to " + std::to_string(p.total()) + ", expected " +
                           std::to_string(total)});
    }
}

inline void check_shape(std::vector<Violation>& out, const Mat& m, Index rows, Index cols,
                        const std::string& field) {
    if (m.rows() != rows || m.cols() != cols) {
        out.push_back({"DimensionMismatch", field,
                       "expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                           ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols())});
    } else if (!m.allFinite()) {
        out.push_back({"NotFinite", field, "non-finite entry"});
    }
}

}  // namespace detail

/// Every invariant the model breaks; empty means valid.
[[nodiscard]] inline std::vector<Violation> model_violations(const SystemModel& m) {
    std::vector<Violation> out;
    const Index dx = m.A.rows();
    if (m.n < 1) out.push_back({"PartitionArity", "n", "need at least one controller"});
    if (m.horizon < 1) out.push_back({"DimensionMismatch", "horizon", "horizon must be >= 1"});
    detail::check_shape(out, m.A, dx, dx, "A");
    detail::check_shape(out, m.B, dx, m.B.cols(), "B");
    detail::check_shape(out, m.M, m.M.rows(), dx, "M");
    detail::check_shape(out, m.N, m.M.rows(), m.B.cols(), "N");
    detail::check_partition(out, m.controller_partition, m.n, m.B.cols(), "controller_partition");
    if (m.state_partition) {
        detail::check_partition(out, *m.state_partition, m.n, dx, "state_partition");
    }
    detail::check_covariance(out, m.sigma_x, dx, "Sigma_x");
    detail::check_covariance(out, m.sigma_w, dx, "Sigma_w");

    if (m.C) {
        if (!m.sigma_v) out.push_back({"ModeMismatch", "Sigma_v", "C present without Sigma_v"});
        if (!m.observation_partition) {
            out.push_back({"ModeMismatch", "observation_partition",
                           "C present without observation_partition"});
        }
        detail::check_shape(out, *m.C, m.C->rows(), dx, "C");
        if (m.observation_partition) {
            detail::check_partition(out, *m.observation_partition, m.n, m.C->rows(),
                                    "observation_partition");
        }
        if (m.sigma_v) detail::check_covariance(out, *m.sigma_v, m.C->rows(), "Sigma_v");
    } else {
        if (m.sigma_v) out.push_back({"ModeMismatch", "Sigma_v", "Sigma_v given without C"});
        if (m.observation_partition) {
            out.push_back({"ModeMismatch", "observation_partition",
                           "observation_partition given without C"});
        }
    }
    return out;
}

/// Returns the model unchanged when valid; throws ValidationError listing
/// every violation otherwise.
[[nodiscard]] inline SystemModel validate_model(SystemModel raw) {
    auto v = model_violations(raw);
    if (!v.empty()) throw ValidationError(std::move(v));
    return raw;
}

enum class ProfileKind { CentralizedSF, DecentralizedSF, CentralizedOF, DecentralizedOF, Zero };

[[nodiscard]] inline std::string_view to_string(ProfileKind k) noexcept {
    switch (k) {
        case ProfileKind::CentralizedSF: return "centralized-sf";
        case ProfileKind::DecentralizedSF: return "decentralized-sf";
        case ProfileKind::CentralizedOF: return "centralized-of";
        case ProfileKind::DecentralizedOF: return "decentralized-of";
        case ProfileKind::Zero: return "zero";
    }
    return "unknown";
}

[[nodiscard]] inline std::optional<ProfileKind> parse_profile_kind(std::string_view s) noexcept {
    for (auto k : {ProfileKind::CentralizedSF, ProfileKind::DecentralizedSF,
                   ProfileKind::CentralizedOF, ProfileKind::DecentralizedOF, ProfileKind::Zero}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

/// A model plus the experiment settings read from one scenario file.
struct ScenarioConfig {
    SystemModel model;
    std::uint64_t seed = 0;
    std::uint32_t num_runs = 1;
    std::vector<ProfileKind> profiles;
    std::optional<std::string> trace_path;
    std::optional<std::string> summary_path;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

}  // namespace sublqg
