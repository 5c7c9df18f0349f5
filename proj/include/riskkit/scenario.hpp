#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskkit/bayesnet.hpp"
#include "riskkit/hs1.hpp"
#include "riskkit/risk.hpp"
#include "riskkit/version.hpp"

namespace riskkit {

using json = nlohmann::json;

struct ScenarioSpec {
    int schema_version = 1;
    std::string id;
    HazardMode mode = HazardMode::discrete;
    double lambda_s = 0;  // discrete mode, /h
    double p_s = 0;       // continuous mode (time proportion; reported as-is)
    InjuryLevel level = InjuryLevel::I2plus;
    size_t samples = 0;
    std::uint64_t seed = 0;
    std::string risk_output;
    std::vector<BnNode> nodes;
    std::optional<RacSpec> rac;
    json raw;  // canonical source, digested into reports
};

// ---- formatting ---------------------------------------------------------

// Decimal with 6 significant digits; reports carry these for humans and the
// exact hex doubles in a sidecar for bit reproducibility.
inline std::string format_sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string format_hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

inline std::string format_pm(double mean, double half) {
    return format_sig6(mean) + " ± " + format_sig6(half);
}

inline std::string digest_hex(const std::string& bytes) {
    std::uint64_t h = detail::fnv1a(bytes);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---- spec parsing ---------------------------------------------------------

namespace detail {

inline InjuryLevel injury_level_from_string(const std::string& s) {
    if (s == "I1+") return InjuryLevel::I1plus;
    if (s == "I2+") return InjuryLevel::I2plus;
    if (s == "I3") return InjuryLevel::I3;
    throw std::invalid_argument("unknown injury level: " + s);
}

inline Distribution distribution_from_json(const json& j) {
    return make_distribution(family_from_string(j.at("family").get<std::string>()),
                             j.at("params").get<std::vector<double>>());
}

inline ModelTerms terms_from_json(const json& jterms, const std::vector<std::string>& parents,
                                  Eigen::VectorXd& beta) {
    ModelTerms terms;
    beta.resize(static_cast<long>(jterms.size()));
    long idx = 0;
    for (const auto& jt : jterms) {
        Term t;
        beta[idx++] = jt.at("coef").get<double>();
        std::string name;
        auto factors = jt.value("factors", std::vector<std::string>{});
        auto abs_flags = jt.value("abs", std::vector<bool>{});
        for (size_t i = 0; i < factors.size(); ++i) {
            auto it = std::find(parents.begin(), parents.end(), factors[i]);
            if (it == parents.end())
                throw std::invalid_argument("regression term references non-parent " +
                                            factors[i]);
            t.factors.push_back(static_cast<int>(it - parents.begin()));
            bool ab = i < abs_flags.size() && abs_flags[i];
            t.absolute.push_back(ab);
            name += (name.empty() ? "" : "*") + (ab ? "abs(" + factors[i] + ")" : factors[i]);
        }
        t.name = name.empty() ? "1" : name;
        terms.push_back(std::move(t));
    }
    return terms;
}

inline BnNode node_from_json(const json& j) {
    BnNode n;
    n.name = j.at("name").get<std::string>();
    n.parents = j.value("parents", std::vector<std::string>{});
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "marginal") {
        n.spec = MarginalSpec{distribution_from_json(j)};
    } else if (kind == "copula_group") {
        CopulaGroupSpec g;
        g.members = j.at("members").get<std::vector<std::string>>();
        for (const auto& jm : j.at("marginals"))
            g.joint.marginals.push_back(distribution_from_json(jm));
        auto rows = j.at("correlation").get<std::vector<std::vector<double>>>();
        long d = static_cast<long>(rows.size());
        g.joint.copula.sigma.resize(d, d);
        for (long r = 0; r < d; ++r) {
            if (static_cast<long>(rows[static_cast<size_t>(r)].size()) != d)
                throw std::invalid_argument("copula group " + n.name +
                                            ": correlation matrix not square");
            for (long c = 0; c < d; ++c)
                g.joint.copula.sigma(r, c) = rows[static_cast<size_t>(r)][static_cast<size_t>(c)];
        }
        n.spec = std::move(g);
    } else if (kind == "categorical") {
        CategoricalSpec c;
        c.labels = j.at("labels").get<std::vector<std::string>>();
        c.probs = j.at("probs").get<std::vector<double>>();
        n.spec = std::move(c);
    } else if (kind == "regression") {
        RegressionSpec r;
        r.failure_parent = j.value("failure_parent", std::string{});
        r.sentinel = j.value("sentinel", 0.0);
        std::vector<std::string> value_parents;
        for (const auto& p : n.parents)
            if (p != r.failure_parent) value_parents.push_back(p);
        r.terms = terms_from_json(j.at("terms"), value_parents, r.beta);
        r.noise = distribution_from_json(j.at("noise"));
        std::string tr = j.value("transform", "none");
        r.transform = tr == "exp"   ? OutputTransform::exp_out
                      : tr == "abs" ? OutputTransform::abs_out
                                    : OutputTransform::none;
        if (tr != "none" && tr != "exp" && tr != "abs")
            throw std::invalid_argument("node " + n.name + ": unknown transform " + tr);
        n.spec = std::move(r);
    } else if (kind == "failure") {
        FailureSpec f;
        f.cause_parent = j.value("cause_parent", std::string{});
        if (f.cause_parent.empty()) {
            f.p = j.at("p").get<double>();
        } else {
            f.p_given_0 = j.at("p_given_0").get<double>();
            f.p_given_1 = j.at("p_given_1").get<double>();
        }
        n.spec = std::move(f);
    } else if (kind == "deterministic") {
        DeterministicSpec d;
        d.function = j.value("function", std::string{});
        if (j.contains("expression"))
            d.expression = std::make_shared<Expression>(
                Expression::parse(j.at("expression").get<std::string>()));
        n.spec = std::move(d);
    } else if (kind == "injury") {
        InjurySpec i;
        i.b0 = j.at("b0").get<double>();
        i.b1 = j.at("b1").get<double>();
        i.gated = j.value("gated", false);
        n.spec = i;
    } else {
        throw std::invalid_argument("unknown node kind: " + kind);
    }
    return n;
}

}  // namespace detail

inline ScenarioSpec parse_scenario(const json& j) {
    ScenarioSpec s;
    s.raw = j;
    s.schema_version = j.at("schema_version").get<int>();
    if (s.schema_version != 1)
        throw std::invalid_argument("unsupported schema_version " +
                                    std::to_string(s.schema_version));
    s.id = j.at("scenario_id").get<std::string>();
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "discrete") {
        s.mode = HazardMode::discrete;
        s.lambda_s = j.at("lambda_s").get<double>();
    } else if (mode == "continuous") {
        s.mode = HazardMode::continuous;
        s.p_s = j.at("p_s").get<double>();
    } else {
        throw std::invalid_argument("mode must be discrete or continuous");
    }
    s.level = detail::injury_level_from_string(j.value("injury_level", "I2+"));
    s.samples = j.at("samples").get<size_t>();
    if (s.samples < 2) throw std::invalid_argument("samples must be >= 2");
    s.seed = j.at("seed").get<std::uint64_t>();
    s.risk_output = j.at("risk_output").get<std::string>();
    for (const auto& jn : j.at("nodes")) s.nodes.push_back(detail::node_from_json(jn));
    if (j.contains("rac")) {
        RacSpec rac;
        rac.k_s = j.at("rac").at("k_s").get<double>();
        for (const auto& [k, v] : j.at("rac").at("lambda_human").items())
            rac.lambda_human[detail::injury_level_from_string(k)] = v.get<double>();
        s.rac = rac;
    }
    return s;
}

inline ScenarioSpec parse_scenario(const std::string& text) {
    return parse_scenario(json::parse(text));
}

// ---- scenario execution ----------------------------------------------------

inline BnGraph build_scenario_graph(const ScenarioSpec& spec) {
    register_hs1_functions();
    BnGraph g = BnGraph::build(spec.nodes);
    const auto& order = g.topological_order();
    if (std::find(order.begin(), order.end(), spec.risk_output) == order.end())
        throw GraphError("risk output node " + spec.risk_output + " not found");
    return g;
}

struct RiskReport {
    ScenarioSpec spec;
    RiskEstimate estimate;
    SampleTable samples;  // kept for SA exports
    json to_json() const;
};

inline json RiskReport::to_json() const {
    const auto& e = estimate;
    double half = 0.5 * (e.ci_high - e.ci_low);
    json out;
    out["tool"] = {{"name", "riskkit"}, {"version", kVersion}};
    out["scenario_id"] = spec.id;
    out["schema_version"] = spec.schema_version;
    out["seed"] = spec.seed;
    out["samples"] = spec.samples;
    out["injury_level"] = to_string(spec.level);
    out["mode"] = spec.mode == HazardMode::discrete ? "discrete" : "continuous";
    json est;
    est["p_hat"] = format_sig6(e.p_hat);
    est["variance"] = format_sig6(e.variance);
    est["ci_low"] = format_sig6(e.ci_low);
    est["ci_high"] = format_sig6(e.ci_high);
    est["ci"] = format_pm(e.p_hat, half);
    if (std::isfinite(e.lambda_hat)) {
        est["lambda_hat_per_h"] = format_sig6(e.lambda_hat);
        double scale = spec.mode == HazardMode::discrete ? spec.lambda_s : spec.p_s;
        est["lambda_ci_per_h"] = format_pm(e.lambda_hat, half * scale);
    }
    out["estimate"] = est;
    json exact;
    exact["p_hat"] = format_hex(e.p_hat);
    exact["variance"] = format_hex(e.variance);
    exact["ci_low"] = format_hex(e.ci_low);
    exact["ci_high"] = format_hex(e.ci_high);
    if (std::isfinite(e.lambda_hat)) exact["lambda_hat_per_h"] = format_hex(e.lambda_hat);
    out["estimate_exact"] = exact;
    if (spec.rac && std::isfinite(e.lambda_hat)) {
        auto verdict = prb_check({{spec.level, e.lambda_hat}}, *spec.rac);
        out["prb"] = {{to_string(spec.level), verdict.at(spec.level) ? "pass" : "fail"}};
    }
    out["input_digest"] = digest_hex(spec.raw.dump());
    return out;
}

// Samples the network, evaluates the risk output column, and scales the mean
// injury probability by the scenario rate (discrete) or time share.
inline RiskReport run_scenario(const ScenarioSpec& spec, int workers = 1) {
    BnGraph g = build_scenario_graph(spec);
    RiskReport rep;
    rep.spec = spec;
    rep.samples = g.ancestral_sample(spec.samples, spec.seed, workers);
    rep.estimate = mcs_estimate(rep.samples.column(spec.risk_output));
    double scale = spec.mode == HazardMode::discrete ? spec.lambda_s : spec.p_s;
    rep.estimate.lambda_hat = scale * rep.estimate.p_hat;
    return rep;
}

}  // namespace riskkit
