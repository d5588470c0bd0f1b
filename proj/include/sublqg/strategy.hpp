#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kalman.hpp"
#include "linalg.hpp"
#include "lqr.hpp"
#include "model.hpp"
#include "substitution.hpp"

namespace sublqg {

/// Everything synthesized once per model and shared read-only by every
/// controller and simulation worker.
struct Design {
    SystemModel model;
    GainSchedule gains;
    std::optional<FilterSchedule> filter;
    SubstitutionSet subs;
};

[[nodiscard]] inline std::shared_ptr<const Design> synthesize(const SystemModel& model) {
    auto d = std::make_shared<Design>();
    d->model = validate_model(model);
    d->gains = solve_centralized_lqr(d->model);
    if (d->model.mode() == Mode::OutputFeedback) d->filter = solve_kalman(d->model);
    d->subs = check_substitutable(d->model);
    return d;
}

// ---------------------------------------------------------------------------
// Information structures
// ---------------------------------------------------------------------------

enum class SignalKind { X, Y, U };

/// Owner index meaning "the whole vector" rather than one controller's block.
inline constexpr Index kAllOwners = -1;

/// One recorded quantity: block `owner` of X_time, Y_time or U_time.
struct Signal {
    SignalKind kind;
    Index owner;
    Index time;
};

[[nodiscard]] inline std::string to_string(const Signal& s) {
    const char* k = s.kind == SignalKind::X ? "X" : s.kind == SignalKind::Y ? "Y" : "U";
    const std::string who = s.owner == kAllOwners ? "*" : std::to_string(s.owner + 1);
    return std::string(k) + "^" + who + "_" + std::to_string(s.time);
}

enum class Recall { Current, History };

/// Declared set of signals a controller may use at time t. For X and Y,
/// Current means time t and History means 1..t; for U the window ends at t-1.
class InformationSet {
public:
    struct Item {
        SignalKind kind;
        Index owner;
        Recall recall;
    };

    InformationSet() = default;
    explicit InformationSet(std::vector<Item> items) : items_(std::move(items)) {}

    /// {X^i_t}: memoryless local state.
    static InformationSet local_state(Index i) {
        return InformationSet({{SignalKind::X, i, Recall::Current}});
    }
    /// {Y^i_{1:t}, U^i_{1:t-1}}: local observations with perfect recall.
    static InformationSet local_output_history(Index i) {
        return InformationSet({{SignalKind::Y, i, Recall::History}, {SignalKind::U, i, Recall::History}});
    }
    /// {X_{1:t}, U_{1:t-1}}.
    static InformationSet centralized_state() {
        return InformationSet({{SignalKind::X, kAllOwners, Recall::History},
                               {SignalKind::U, kAllOwners, Recall::History}});
    }
    /// {Y_{1:t}, U_{1:t-1}}.
    static InformationSet centralized_output() {
        return InformationSet({{SignalKind::Y, kAllOwners, Recall::History},
                               {SignalKind::U, kAllOwners, Recall::History}});
    }

    [[nodiscard]] InformationSet merged(const InformationSet& other) const {
        auto items = items_;
        items.insert(items.end(), other.items_.begin(), other.items_.end());
        return InformationSet(std::move(items));
    }

    [[nodiscard]] bool contains(const Signal& s, Index t) const {
        for (const auto& it : items_) {
            if (it.kind != s.kind) continue;
            if (it.owner != kAllOwners && it.owner != s.owner) continue;
            const Index last = s.kind == SignalKind::U ? t - 1 : t;
            if (it.recall == Recall::Current ? s.time == last : s.time <= last) return true;
        }
        return false;
    }

    [[nodiscard]] const std::vector<Item>& items() const noexcept { return items_; }

private:
    std::vector<Item> items_;
};

// ---------------------------------------------------------------------------
// Local estimators and strategy maps
// ---------------------------------------------------------------------------

/// S_1^i = L_1^i Y_1^i.
[[nodiscard]] inline Vec local_estimate_init(const Design& d, Index i, const Vec& y1_i) {
    return d.filter->gain_block(1, i) * y1_i;
}

/// S_{t+1}^i = (I - L_{t+1} C)(A S_t^i + B^i U_t^i) + L_{t+1}^i Y_{t+1}^i.
/// Uses only controller i's own observation block and own action.
[[nodiscard]] inline Vec local_estimate_update(const Design& d, Index i, Index t, const Vec& s,
                                               const Vec& u_i, const Vec& y_next_i) {
    const SystemModel& m = d.model;
    const Mat& L = d.filter->gain(t + 1);
    const Vec predicted = m.A * s + m.B_block(i) * u_i;
    return predicted - L * (*m.C * predicted) + d.filter->gain_block(t + 1, i) * y_next_i;
}

/// State-feedback local estimator: vec(0, ..., X^i_t, ..., 0).
[[nodiscard]] inline Vec embed_state_block(const SystemModel& m, Index i, const Vec& x_i) {
    const auto& p = *m.state_partition;
    Vec s = Vec::Zero(m.dx());
    s.segment(p.offset(i), p.size(i)) = x_i;
    return s;
}

/// U_t^i = Lambda^i K_t^i X_t^i.
[[nodiscard]] inline Vec decentralized_sf_action(const Design& d, Index i, Index t, const Vec& x_i) {
    if (!d.subs.substitutable(i)) {
        throw NotSubstitutable("controller " + std::to_string(i + 1) + " is not substitutable");
    }
    return d.subs.lambda(i) * (gain_block(d.gains, t, i) * x_i);
}

/// U_t^i = Lambda^i K_t S_t^i.
[[nodiscard]] inline Vec decentralized_of_action(const Design& d, Index i, Index t, const Vec& s_i) {
    if (!d.subs.substitutable(i)) {
        throw NotSubstitutable("controller " + std::to_string(i + 1) + " is not substitutable");
    }
    return d.subs.lambda(i) * (d.gains.gain(t) * s_i);
}

// ---------------------------------------------------------------------------
// Controllers
// ---------------------------------------------------------------------------

/// Every recorded signal at time t; the strategy reads what its
/// information structure allows. `y` is empty in state feedback and
/// `u_prev` at t = 1.
struct StepInput {
    Index t = 1;
    Vec x;
    Vec y;
    Vec u_prev;  // joint action U_{t-1}
};

/// One controller's strategy. Stateful across a single trajectory; `clone`
/// yields an independent copy in the initial state.
class Controller {
public:
    virtual ~Controller() = default;
    [[nodiscard]] virtual std::unique_ptr<Controller> clone() const = 0;
    [[nodiscard]] virtual Vec act(const StepInput& in) = 0;
};

namespace controllers {

class Zero final : public Controller {
public:
    explicit Zero(Index width) : width_(width) {}
    std::unique_ptr<Controller> clone() const override { return std::make_unique<Zero>(width_); }
    Vec act(const StepInput&) override { return Vec::Zero(width_); }

private:
    Index width_;
};

class CentralizedSF final : public Controller {
public:
    CentralizedSF(std::shared_ptr<const Design> d, Index i) : d_(std::move(d)), i_(i) {}
    std::unique_ptr<Controller> clone() const override {
        return std::make_unique<CentralizedSF>(d_, i_);
    }
    Vec act(const StepInput& in) override {
        const auto& p = d_->model.controller_partition;
        return (d_->gains.gain(in.t) * in.x).segment(p.offset(i_), p.size(i_));
    }

private:
    std::shared_ptr<const Design> d_;
    Index i_;
};

class DecentralizedSF final : public Controller {
public:
    DecentralizedSF(std::shared_ptr<const Design> d, Index i) : d_(std::move(d)), i_(i) {}
    std::unique_ptr<Controller> clone() const override {
        return std::make_unique<DecentralizedSF>(d_, i_);
    }
    Vec act(const StepInput& in) override {
        const auto& p = *d_->model.state_partition;
        return decentralized_sf_action(*d_, i_, in.t, in.x.segment(p.offset(i_), p.size(i_)));
    }

private:
    std::shared_ptr<const Design> d_;
    Index i_;
};

/// Runs the full centralized filter and applies block i of K_t Z_t.
class CentralizedOF final : public Controller {
public:
    CentralizedOF(std::shared_ptr<const Design> d, Index i) : d_(std::move(d)), i_(i) {}
    std::unique_ptr<Controller> clone() const override {
        return std::make_unique<CentralizedOF>(d_, i_);
    }
    Vec act(const StepInput& in) override {
        if (in.t == 1) {
            z_ = initial_estimate(*d_->filter, in.y);
        } else {
            z_ = centralized_estimate_update(d_->model, *d_->filter, in.t - 1, z_, in.u_prev, in.y);
        }
        const auto& p = d_->model.controller_partition;
        return (d_->gains.gain(in.t) * z_).segment(p.offset(i_), p.size(i_));
    }

private:
    std::shared_ptr<const Design> d_;
    Index i_;
    Vec z_;
};

/// Runs the local estimator S^i on its own observations and actions.
class DecentralizedOF final : public Controller {
public:
    DecentralizedOF(std::shared_ptr<const Design> d, Index i) : d_(std::move(d)), i_(i) {}
    std::unique_ptr<Controller> clone() const override {
        return std::make_unique<DecentralizedOF>(d_, i_);
    }
    Vec act(const StepInput& in) override {
        const auto& op = *d_->model.observation_partition;
        const auto& cp = d_->model.controller_partition;
        const Vec y_i = in.y.segment(op.offset(i_), op.size(i_));
        if (in.t == 1) {
            s_ = local_estimate_init(*d_, i_, y_i);
        } else {
            const Vec u_i = in.u_prev.segment(cp.offset(i_), cp.size(i_));
            s_ = local_estimate_update(*d_, i_, in.t - 1, s_, u_i, y_i);
        }
        return decentralized_of_action(*d_, i_, in.t, s_);
    }

private:
    std::shared_ptr<const Design> d_;
    Index i_;
    Vec s_;
};

}  // namespace controllers

/// A strategy per controller plus the information set each one declares.
struct StrategyProfile {
    ProfileKind kind = ProfileKind::Zero;
    std::shared_ptr<const Design> design;
    std::vector<std::shared_ptr<const Controller>> controllers;
    std::vector<InformationSet> declared;
    bool custom = false;  // user-supplied controllers; no closed-form structure known

    [[nodiscard]] Index size() const noexcept { return static_cast<Index>(controllers.size()); }

    [[nodiscard]] StrategyProfile with_information(std::vector<InformationSet> sets) const {
        if (static_cast<Index>(sets.size()) != size()) {
            throw std::invalid_argument("one information set per controller required");
        }
        StrategyProfile p = *this;
        p.declared = std::move(sets);
        return p;
    }
};

[[nodiscard]] inline bool is_state_feedback(ProfileKind k) noexcept {
    return k == ProfileKind::CentralizedSF || k == ProfileKind::DecentralizedSF;
}
[[nodiscard]] inline bool is_output_feedback(ProfileKind k) noexcept {
    return k == ProfileKind::CentralizedOF || k == ProfileKind::DecentralizedOF;
}
[[nodiscard]] inline bool is_decentralized(ProfileKind k) noexcept {
    return k == ProfileKind::DecentralizedSF || k == ProfileKind::DecentralizedOF;
}

/// Builds the profile of the requested kind with its minimal declared
/// information sets. Throws ModeMismatch when the kind does not match the
/// model's feedback mode, NotSubstitutable for a decentralized kind on a
/// model failing the substitution test.
[[nodiscard]] inline StrategyProfile make_profile(std::shared_ptr<const Design> design,
                                                  ProfileKind kind) {
    const SystemModel& m = design->model;
    if (is_state_feedback(kind) && m.mode() != Mode::StateFeedback) {
        throw ModeMismatch(std::string(to_string(kind)) + " needs a state-feedback model");
    }
    if (is_output_feedback(kind) && m.mode() != Mode::OutputFeedback) {
        throw ModeMismatch(std::string(to_string(kind)) + " needs an output-feedback model");
    }
    if (is_decentralized(kind)) require_substitutable(design->subs);
    if (kind == ProfileKind::DecentralizedSF && !m.state_partition) {
        throw MissingPartition("decentralized-sf needs a state partition");
    }

    StrategyProfile p;
    p.kind = kind;
    p.design = design;
    for (Index i = 0; i < m.n; ++i) {
        switch (kind) {
            case ProfileKind::CentralizedSF:
                p.controllers.push_back(std::make_shared<controllers::CentralizedSF>(design, i));
                p.declared.push_back(InformationSet::centralized_state());
                break;
            case ProfileKind::DecentralizedSF:
                p.controllers.push_back(std::make_shared<controllers::DecentralizedSF>(design, i));
                p.declared.push_back(InformationSet::local_state(i));
                break;
            case ProfileKind::CentralizedOF:
                p.controllers.push_back(std::make_shared<controllers::CentralizedOF>(design, i));
                p.declared.push_back(InformationSet::centralized_output());
                break;
            case ProfileKind::DecentralizedOF:
                p.controllers.push_back(std::make_shared<controllers::DecentralizedOF>(design, i));
                p.declared.push_back(InformationSet::local_output_history(i));
                break;
            case ProfileKind::Zero:
                p.controllers.push_back(
                    std::make_shared<controllers::Zero>(m.controller_partition.size(i)));
                p.declared.emplace_back();
                break;
        }
    }
    return p;
}

/// Profile from arbitrary controllers. Simulation and feasibility checks
/// accept it; exact cost evaluation does not.
[[nodiscard]] inline StrategyProfile make_custom_profile(
    std::shared_ptr<const Design> design, std::vector<std::shared_ptr<const Controller>> controllers,
    std::vector<InformationSet> declared) {
    if (static_cast<Index>(controllers.size()) != design->model.n || declared.size() != controllers.size()) {
        throw std::invalid_argument("one controller and one information set per controller required");
    }
    StrategyProfile p;
    p.design = std::move(design);
    p.controllers = std::move(controllers);
    p.declared = std::move(declared);
    p.custom = true;
    return p;
}

/// Centralized and decentralized kinds for the model's feedback mode.
[[nodiscard]] inline ProfileKind centralized_kind(Mode mode) noexcept {
    return mode == Mode::StateFeedback ? ProfileKind::CentralizedSF : ProfileKind::CentralizedOF;
}
[[nodiscard]] inline ProfileKind decentralized_kind(Mode mode) noexcept {
    return mode == Mode::StateFeedback ? ProfileKind::DecentralizedSF : ProfileKind::DecentralizedOF;
}

}  // namespace sublqg
