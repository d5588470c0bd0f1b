#pragma once

#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "analysis.hpp"
#include "errors.hpp"
#include "generator.hpp"
#include "io.hpp"
#include "model.hpp"
#include "sim.hpp"
#include "strategy.hpp"

namespace sublqg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

using json = nlohmann::json;

inline void diagnostic(std::ostream& err, const std::string& code, const std::string& message) {
    err << json{{"error", code}, {"message", message}}.dump() << "\n";
}

struct Options {
    std::string scenario;
    std::string profile;
    std::uint64_t seed = 0;
    std::uint32_t runs = 0;
    std::string out;
    bool pretty = false;
    unsigned jobs = 1;
    Index controller = 0;
    bool filter = false;
    GeneratorOptions gen;
};

inline void emit(std::ostream& out, const json& doc) { out << doc.dump() << "\n"; }

inline int cmd_check(const Options& o, std::ostream& out) {
    const auto cfg = io::load_scenario(o.scenario);
    const auto subs = check_substitutable(cfg.model);
    const json doc = io::substitution_to_json(subs);
    if (!o.out.empty()) io::write_file(o.out, doc.dump(2) + "\n");
    if (o.pretty) {
        out << "substitutable: " << (subs.substitutable() ? "yes" : "no") << " (tolerance "
            << subs.tolerance << ")\n";
        for (Index i = 0; i < subs.size(); ++i) {
            out << "  controller " << i + 1 << ": residual " << subs.residuals[static_cast<std::size_t>(i)]
                << (subs.substitutable(i) ? "  ok" : "  FAIL") << "\n";
        }
    } else {
        emit(out, doc);
    }
    return kExitOk;
}

inline int cmd_solve(const Options& o, std::ostream& out) {
    const auto cfg = io::load_scenario(o.scenario);
    const auto design = synthesize(cfg.model);
    json doc;
    doc["gains"] = io::gains_to_json(design->gains);
    if (o.filter) {
        if (!design->filter) throw ModeMismatch("--filter needs an output-feedback scenario (C present)");
        doc["filter"] = io::filter_to_json(*design->filter);
    }
    if (o.controller != 0) {
        const Index i = o.controller - 1;
        if (i < 0 || i >= cfg.model.n) throw std::invalid_argument("--controller out of range");
        if (!design->subs.substitutable(i)) {
            throw NotSubstitutable("controller " + std::to_string(o.controller) + " is not substitutable");
        }
        json steps = json::array();
        for (Index t = 1; t <= cfg.model.horizon; ++t) {
            json step{{"t", t}, {"lambda_K", io::matrix_to_json(design->subs.lambda(i) * design->gains.gain(t))}};
            if (cfg.model.state_partition) {
                step["lambda_K_block"] = io::matrix_to_json(design->subs.lambda(i) * gain_block(design->gains, t, i));
            }
            steps.push_back(std::move(step));
        }
        doc["controller"] = {{"index", o.controller},
                             {"lambda", io::matrix_to_json(design->subs.lambda(i))},
                             {"steps", steps}};
    }
    if (!o.out.empty()) io::write_file(o.out, doc.dump(2) + "\n");
    if (o.pretty) {
        out << "horizon " << cfg.model.horizon << ", pseudo-inverse fallback: "
            << (design->gains.any_singular() ? "yes" : "no") << "\n";
        for (Index t = 1; t <= cfg.model.horizon; ++t) {
            out << "K_" << t << " =\n" << design->gains.gain(t) << "\n";
        }
    } else {
        emit(out, doc);
    }
    return kExitOk;
}

inline int cmd_simulate(const Options& o, std::ostream& out) {
    const auto cfg = io::load_scenario(o.scenario);
    ProfileKind kind;
    if (!o.profile.empty()) {
        kind = *parse_profile_kind(o.profile);
    } else if (!cfg.profiles.empty()) {
        kind = cfg.profiles.front();
    } else {
        throw CLI::ValidationError("--profile", "no profile given and none in the scenario");
    }
    const std::uint64_t seed = o.seed;
    const std::uint32_t runs = o.runs != 0 ? o.runs : cfg.num_runs;
    const auto design = synthesize(cfg.model);
    const auto res = simulate(make_profile(design, kind), seed, runs, o.jobs);
    const json summary = io::trace_summary(res);

    const std::string trace_path = !o.out.empty() ? o.out : cfg.trace_path.value_or("");
    if (!trace_path.empty()) {
        const std::string summary_path =
            !o.out.empty() ? o.out + ".summary.json" : cfg.summary_path.value_or(trace_path + ".summary.json");
        io::save_trace(res, trace_path, summary_path);
    }
    if (o.pretty) {
        out << to_string(kind) << ": " << runs << " runs, seed " << seed << "\n";
        if (summary.contains("mean")) out << "  mean cost " << summary["mean"].get<double>() << "\n";
        if (summary.contains("standard_error")) {
            out << "  standard error " << summary["standard_error"].get<double>() << "\n";
        }
    } else {
        emit(out, summary);
    }
    return kExitOk;
}

inline int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = io::load_scenario(o.scenario);
    const std::uint32_t runs = o.runs != 0 ? o.runs : cfg.num_runs;
    if (runs < 2) throw CLI::ValidationError("--runs", "compare needs at least 2 runs");
    const auto design = synthesize(cfg.model);
    const CostReport rep = compare(design, o.seed, runs, o.jobs);
    if (!o.out.empty()) io::write_file(o.out, io::paired_costs_csv(rep));
    if (o.pretty) {
        out << std::setprecision(12);
        out << "centralized exact " << rep.centralized.exact << ", MC " << rep.centralized.monte_carlo.mean
            << " +/- " << rep.centralized.monte_carlo.standard_error << "\n";
        if (rep.decentralized) {
            out << "decentralized exact " << rep.decentralized->exact << ", MC "
                << rep.decentralized->monte_carlo.mean << " +/- " << rep.decentralized->monte_carlo.standard_error
                << "\n";
            out << "pathwise gap " << rep.pathwise_max_rel_gap << ", exact gap " << rep.exact_rel_gap << "\n";
        }
        out << "zero baseline exact " << rep.zero.exact << "\n";
    } else {
        emit(out, io::cost_report_to_json(rep));
    }
    if (rep.refusal) {
        diagnostic(err, *rep.refusal, "decentralized strategies need a substitutable model");
        return kExitDomain;
    }
    return kExitOk;
}

inline int cmd_generate(const Options& o, std::ostream& out) {
    ScenarioConfig cfg;
    cfg.model = generate_substitutable(o.gen);
    cfg.seed = o.gen.seed;
    cfg.num_runs = 100;
    if (cfg.model.mode() == Mode::StateFeedback) {
        cfg.profiles = {ProfileKind::CentralizedSF, ProfileKind::DecentralizedSF, ProfileKind::Zero};
    } else {
        cfg.profiles = {ProfileKind::CentralizedOF, ProfileKind::DecentralizedOF, ProfileKind::Zero};
    }
    const std::string text = io::scenario_to_json(cfg).dump(2) + "\n";
    if (o.out.empty()) {
        out << text;
    } else {
        io::write_file(o.out, text);
        if (o.pretty) {
            out << "wrote " << o.out << "\n";
        } else {
            emit(out, {{"written", o.out}});
        }
    }
    return kExitOk;
}

}  // namespace detail

/// Entry point shared by the executable and the tests. Exit codes: 0 on
/// success, 1 on a domain error, 2 on a usage, parse or validation error.
/// Diagnostics go to `err` as single-line JSON.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    detail::Options o;
    CLI::App app{"Synthesis and verification of decentralized LQG controllers for systems with "
                 "substitutable actions",
                 "sublqg"};
    app.require_subcommand(1);

    const auto add_scenario = [&](CLI::App* sub) {
        sub->add_option("scenario", o.scenario, "Scenario JSON file")->required();
    };
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", o.out, "Output file");
        sub->add_flag("--pretty", o.pretty, "Human-readable summary instead of JSON on stdout");
    };
    const auto add_runs = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "Base seed of the noise streams");
        sub->add_option("--runs", o.runs, "Number of runs (default: scenario 'runs')");
        sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    };

    auto* check = app.add_subcommand("check", "Report substitution maps, residuals and verdicts");
    add_scenario(check);
    add_common(check);

    auto* solve = app.add_subcommand("solve", "Emit centralized gains (and filter gains)");
    add_scenario(solve);
    add_common(solve);
    solve->add_option("--controller", o.controller, "Also emit Lambda^i K_t for controller i (1-based)")
        ->check(CLI::PositiveNumber);
    solve->add_flag("--filter", o.filter, "Include Kalman gains and covariances");

    auto* sim = app.add_subcommand("simulate", "Closed-loop simulation with trace output");
    add_scenario(sim);
    add_common(sim);
    add_runs(sim);
    sim->add_option("--profile", o.profile, "Strategy profile")
        ->check(CLI::IsMember({"centralized-sf", "decentralized-sf", "centralized-of", "decentralized-of", "zero"}));

    auto* cmp = app.add_subcommand("compare", "Centralized vs decentralized cost report");
    add_scenario(cmp);
    add_common(cmp);
    add_runs(cmp);

    auto* gen = app.add_subcommand("generate", "Write a random substitutable scenario");
    gen->add_option("--dx", o.gen.dx, "State dimension")->required()->check(CLI::PositiveNumber);
    gen->add_option("--dc", o.gen.dc, "Cost output dimension")->required()->check(CLI::PositiveNumber);
    gen->add_option("--w", o.gen.w, "Action width per controller")->required()->check(CLI::PositiveNumber);
    gen->add_option("--n", o.gen.n, "Number of controllers")->required()->check(CLI::PositiveNumber);
    gen->add_option("--seed", o.gen.seed, "Generator seed");
    gen->add_option("--obs", o.gen.obs_rows, "Observation rows per controller; 0 for state feedback")
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--horizon", o.gen.horizon, "Horizon T")->check(CLI::PositiveNumber);
    add_common(gen);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            const auto parsed = app.get_subcommands();
            out << (parsed.empty() ? app.help("", CLI::AppFormatMode::All) : parsed.front()->help());
            return kExitOk;
        }
        detail::diagnostic(err, "UsageError", e.what());
        return kExitUsage;
    }

    try {
        if (*check) return detail::cmd_check(o, out);
        if (*solve) return detail::cmd_solve(o, out);
        if (*sim) return detail::cmd_simulate(o, out);
        if (*cmp) return detail::cmd_compare(o, out, err);
        if (*gen) return detail::cmd_generate(o, out);
    } catch (const CLI::Error& e) {
        detail::diagnostic(err, "UsageError", e.what());
        return kExitUsage;
    } catch (const ParseError& e) {
        detail::diagnostic(err, e.code(), e.what());
        return kExitUsage;
    } catch (const ValidationError& e) {
        detail::diagnostic(err, e.code(), e.what());
        return kExitUsage;
    } catch (const Error& e) {
        detail::diagnostic(err, e.code(), e.what());
        return kExitDomain;
    } catch (const std::invalid_argument& e) {
        detail::diagnostic(err, "UsageError", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        detail::diagnostic(err, "InternalError", e.what());
        return kExitDomain;
    }
    return kExitUsage;
}

[[nodiscard]] inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("sublqg");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace sublqg::cli
