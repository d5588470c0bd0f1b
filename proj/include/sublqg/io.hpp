#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "analysis.hpp"
#include "errors.hpp"
#include "kalman.hpp"
#include "lqr.hpp"
#include "model.hpp"
#include "sim.hpp"
#include "substitution.hpp"

namespace sublqg::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Matrices and partitions
// ---------------------------------------------------------------------------

[[nodiscard]] inline json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

[[nodiscard]] inline json vector_to_json(const Vec& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

[[nodiscard]] inline Mat matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_array()) throw ParseError("field '" + field + "': expected an array of rows");
    const auto rows = static_cast<Index>(j.size());
    const Index cols = rows == 0 ? 0 : static_cast<Index>(j[0].is_array() ? j[0].size() : 0);
    Mat m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            throw ParseError("field '" + field + "' row " + std::to_string(i + 1) +
                             ": expected an array of " + std::to_string(cols) + " numbers");
        }
        for (Index k = 0; k < cols; ++k) {
            const json& x = row[static_cast<std::size_t>(k)];
            if (!x.is_number()) {
                throw ParseError("field '" + field + "' row " + std::to_string(i + 1) + " column " +
                                 std::to_string(k + 1) + ": expected a number");
            }
            m(i, k) = x.get<double>();
        }
    }
    return m;
}

[[nodiscard]] inline Partition partition_from_json(const json& j, const std::string& field) {
    if (!j.is_array()) throw ParseError("field '" + field + "': expected an array of block widths");
    std::vector<Index> sizes;
    for (const auto& x : j) {
        if (!x.is_number_integer()) throw ParseError("field '" + field + "': block widths must be integers");
        sizes.push_back(x.get<Index>());
    }
    return Partition(std::move(sizes));
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

namespace detail {

inline const json& require(const json& doc, const std::string& key) {
    if (!doc.contains(key)) throw ParseError("missing required field '" + key + "'");
    return doc.at(key);
}

inline Index require_int(const json& doc, const std::string& key) {
    const json& v = require(doc, key);
    if (!v.is_number_integer()) throw ParseError("field '" + key + "': expected an integer");
    return v.get<Index>();
}

}  // namespace detail

[[nodiscard]] inline json model_to_json(const SystemModel& m) {
    json doc;
    doc["A"] = matrix_to_json(m.A);
    doc["B"] = matrix_to_json(m.B);
    doc["M"] = matrix_to_json(m.M);
    doc["N"] = matrix_to_json(m.N);
    doc["Sigma_x"] = matrix_to_json(m.sigma_x);
    doc["Sigma_w"] = matrix_to_json(m.sigma_w);
    doc["controller_partition"] = m.controller_partition.sizes();
    if (m.state_partition) doc["state_partition"] = m.state_partition->sizes();
    if (m.C) doc["C"] = matrix_to_json(*m.C);
    if (m.sigma_v) doc["Sigma_v"] = matrix_to_json(*m.sigma_v);
    if (m.observation_partition) doc["observation_partition"] = m.observation_partition->sizes();
    doc["horizon"] = m.horizon;
    doc["n"] = m.n;
    return doc;
}

/// Reads the model keys of a scenario document. Schema errors raise
/// ParseError; the result is not yet validated.
[[nodiscard]] inline SystemModel model_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("scenario must be a JSON object");
    SystemModel m;
    m.A = matrix_from_json(detail::require(doc, "A"), "A");
    m.B = matrix_from_json(detail::require(doc, "B"), "B");
    m.M = matrix_from_json(detail::require(doc, "M"), "M");
    m.N = matrix_from_json(detail::require(doc, "N"), "N");
    m.sigma_x = matrix_from_json(detail::require(doc, "Sigma_x"), "Sigma_x");
    m.sigma_w = matrix_from_json(detail::require(doc, "Sigma_w"), "Sigma_w");
    m.controller_partition =
        partition_from_json(detail::require(doc, "controller_partition"), "controller_partition");
    m.horizon = detail::require_int(doc, "horizon");
    m.n = detail::require_int(doc, "n");
    if (doc.contains("state_partition")) {
        m.state_partition = partition_from_json(doc.at("state_partition"), "state_partition");
    }
    if (doc.contains("C")) {
        m.C = matrix_from_json(doc.at("C"), "C");
        m.sigma_v = matrix_from_json(detail::require(doc, "Sigma_v"), "Sigma_v");
        m.observation_partition =
            partition_from_json(detail::require(doc, "observation_partition"), "observation_partition");
    } else {
        if (doc.contains("Sigma_v")) throw ParseError("field 'Sigma_v' given without 'C'");
        if (doc.contains("observation_partition")) {
            throw ParseError("field 'observation_partition' given without 'C'");
        }
    }
    return m;
}

[[nodiscard]] inline json scenario_to_json(const ScenarioConfig& c) {
    json doc = model_to_json(c.model);
    doc["seed"] = c.seed;
    doc["runs"] = c.num_runs;
    json profiles = json::array();
    for (auto k : c.profiles) profiles.push_back(std::string(to_string(k)));
    doc["profiles"] = profiles;
    if (c.trace_path || c.summary_path) {
        json out = json::object();
        if (c.trace_path) out["trace"] = *c.trace_path;
        if (c.summary_path) out["summary"] = *c.summary_path;
        doc["output"] = out;
    }
    return doc;
}

/// Parses and validates a scenario document.
[[nodiscard]] inline ScenarioConfig scenario_from_json(const json& doc) {
    ScenarioConfig c;
    c.model = validate_model(model_from_json(doc));
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) throw ParseError("field 'seed': expected an unsigned integer");
        c.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("runs")) {
        if (!doc["runs"].is_number_unsigned() || doc["runs"].get<std::uint64_t>() < 1 ||
            doc["runs"].get<std::uint64_t>() > 0xffffffffULL) {
            throw ParseError("field 'runs': expected a positive integer");
        }
        c.num_runs = doc["runs"].get<std::uint32_t>();
    }
    if (doc.contains("profiles")) {
        if (!doc["profiles"].is_array()) throw ParseError("field 'profiles': expected an array");
        for (const auto& p : doc["profiles"]) {
            const auto k = p.is_string() ? parse_profile_kind(p.get<std::string>()) : std::nullopt;
            if (!k) throw ParseError("field 'profiles': unknown profile " + p.dump());
            c.profiles.push_back(*k);
        }
    }
    if (doc.contains("output")) {
        const json& out = doc["output"];
        if (out.contains("trace")) c.trace_path = out["trace"].get<std::string>();
        if (out.contains("summary")) c.summary_path = out["summary"].get<std::string>();
    }
    return c;
}

[[nodiscard]] inline ScenarioConfig parse_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    try {
        return scenario_from_json(doc);
    } catch (const json::exception& e) {
        throw ParseError(std::string("schema error: ") + e.what());
    }
}

[[nodiscard]] inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("IOError", "cannot write '" + path + "'");
    out << content;
}

[[nodiscard]] inline ScenarioConfig load_scenario(const std::string& path) {
    return parse_scenario(read_file(path));
}

inline void save_scenario(const ScenarioConfig& c, const std::string& path) {
    write_file(path, scenario_to_json(c).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

namespace detail {

inline void csv_rows(std::string& out, Index t, std::uint64_t run, const std::string& kind, const Vec& v) {
    char buf[64];
    for (Index k = 0; k < v.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", v(k));
        out += std::to_string(t) + "," + std::to_string(run) + "," + kind + "," + std::to_string(k) + "," +
               buf + "\n";
    }
}

}  // namespace detail

/// CSV with header `t,run,kind,index,value`: one row per vector component.
/// Kinds are x, u, y, z, s<i> (controller i's local estimate, 1-based) and
/// cost (index 0). `t` is 1-based, `run` and `index` 0-based.
[[nodiscard]] inline std::string trace_csv(const SimulationResult& res) {
    std::string out = "t,run,kind,index,value\n";
    for (const auto& tr : res.runs) {
        for (std::size_t k = 0; k < tr.x.size(); ++k) {
            const auto t = static_cast<Index>(k + 1);
            detail::csv_rows(out, t, tr.run, "x", tr.x[k]);
            detail::csv_rows(out, t, tr.run, "u", tr.u[k]);
            if (!tr.y.empty()) detail::csv_rows(out, t, tr.run, "y", tr.y[k]);
            detail::csv_rows(out, t, tr.run, "z", tr.z[k]);
            for (std::size_t i = 0; i < tr.s[k].size(); ++i) {
                if (tr.s[k][i].size() > 0) detail::csv_rows(out, t, tr.run, "s" + std::to_string(i + 1), tr.s[k][i]);
            }
            detail::csv_rows(out, t, tr.run, "cost", Vec::Constant(1, tr.cost[k]));
        }
    }
    return out;
}

[[nodiscard]] inline json trace_summary(const SimulationResult& res) {
    json doc;
    doc["profile"] = std::string(to_string(res.kind));
    doc["seed"] = res.seed;
    doc["runs"] = res.runs.size();
    doc["costs"] = res.totals();
    if (res.runs.size() >= 2) {
        const auto e = summarize_samples(res.totals());
        doc["mean"] = e.mean;
        doc["standard_error"] = e.standard_error;
        doc["ci95"] = {e.ci_low, e.ci_high};
    } else if (res.runs.size() == 1) {
        doc["mean"] = res.runs[0].total;
    }
    doc["max_estimate_residual"] = res.max_estimate_residual();
    doc["max_superposition_residual"] = res.max_superposition_residual();
    return doc;
}

/// Writes the CSV trace to `csv_path` and the JSON summary to `summary_path`.
inline void save_trace(const SimulationResult& res, const std::string& csv_path,
                       const std::string& summary_path) {
    write_file(csv_path, trace_csv(res));
    write_file(summary_path, trace_summary(res).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

[[nodiscard]] inline json substitution_to_json(const SubstitutionSet& s) {
    json doc;
    doc["substitutable"] = s.substitutable();
    doc["tolerance"] = s.tolerance;
    json ctl = json::array();
    for (Index i = 0; i < s.size(); ++i) {
        ctl.push_back({{"controller", i + 1},
                       {"residual", s.residuals[static_cast<std::size_t>(i)]},
                       {"substitutable", s.substitutable(i)},
                       {"lambda", matrix_to_json(s.lambda(i))}});
    }
    doc["controllers"] = ctl;
    return doc;
}

[[nodiscard]] inline json gains_to_json(const GainSchedule& g) {
    json doc;
    json steps = json::array();
    for (Index t = 1; t <= g.horizon(); ++t) {
        steps.push_back({{"t", t},
                         {"K", matrix_to_json(g.gain(t))},
                         {"P", matrix_to_json(g.value(t))},
                         {"singular", static_cast<bool>(g.singular[static_cast<std::size_t>(t - 1)])}});
    }
    doc["steps"] = steps;
    doc["any_singular"] = g.any_singular();
    return doc;
}

[[nodiscard]] inline json filter_to_json(const FilterSchedule& f) {
    json steps = json::array();
    for (Index t = 1; t <= f.horizon(); ++t) {
        steps.push_back({{"t", t}, {"L", matrix_to_json(f.gain(t))}, {"Sigma", matrix_to_json(f.covariance(t))}});
    }
    return json{{"steps", steps}};
}

[[nodiscard]] inline json monte_carlo_to_json(const MonteCarloEstimate& e) {
    return {{"mean", e.mean}, {"standard_error", e.standard_error}, {"ci95", {e.ci_low, e.ci_high}}, {"runs", e.runs}};
}

[[nodiscard]] inline json cost_report_to_json(const CostReport& r) {
    const auto profile_json = [](const ProfileCost& p) {
        return json{{"profile", std::string(to_string(p.kind))},
                    {"exact", p.exact},
                    {"monte_carlo", monte_carlo_to_json(p.monte_carlo)}};
    };
    json doc;
    doc["mode"] = r.mode == Mode::StateFeedback ? "state-feedback" : "output-feedback";
    doc["seed"] = r.seed;
    doc["runs"] = r.runs;
    doc["substitutable"] = r.substitutable;
    doc["substitution_residuals"] = r.substitution_residuals;
    if (r.refusal) doc["refusal"] = *r.refusal;
    doc["centralized"] = profile_json(r.centralized);
    doc["decentralized"] = r.decentralized ? profile_json(*r.decentralized) : json(nullptr);
    doc["zero"] = profile_json(r.zero);
    doc["pathwise_max_rel_gap"] = r.pathwise_max_rel_gap;
    doc["exact_rel_gap"] = r.exact_rel_gap;
    doc["estimate_residual_max"] = r.estimate_residual_max;
    doc["superposition_residual_max"] = r.superposition_residual_max;
    doc["verdict"] = {{"pathwise_equal", r.pathwise_equal},
                      {"exact_equal", r.exact_equal},
                      {"lower_bound_holds", r.lower_bound_holds},
                      {"baseline_strictly_worse", r.baseline_strictly_worse}};
    return doc;
}

/// `run,centralized,decentralized,zero` per run; decentralized is empty
/// when the comparison was refused.
[[nodiscard]] inline std::string paired_costs_csv(const CostReport& r) {
    std::string out = "run,centralized,decentralized,zero\n";
    char buf[128];
    for (std::size_t k = 0; k < r.paired.size(); ++k) {
        const auto& p = r.paired[k];
        if (std::isnan(p[1])) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,,%.17g\n", k, p[0], p[2]);
        } else {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", k, p[0], p[1], p[2]);
        }
        out += buf;
    }
    return out;
}

}  // namespace sublqg::io
