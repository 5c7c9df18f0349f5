// riskkit: batch CLI for marginal/copula fitting, factor screening, scenario
// simulation, sensitivity export, and consolidated risk reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "riskkit/copula.hpp"
#include "riskkit/csv.hpp"
#include "riskkit/distribution.hpp"
#include "riskkit/doe.hpp"
#include "riskkit/risk.hpp"
#include "riskkit/scenario.hpp"

namespace fs = std::filesystem;
using riskkit::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

// Atomic write: temp file in the target directory, then rename.
void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return json::parse(in);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct GlobalOpts {
    std::uint64_t seed = 0;
    size_t samples = 0;
    double alpha = 0.05;
    std::string out = ".";
    std::string config;
};

void require_file(const std::string& path) {
    if (!fs::exists(path)) throw std::invalid_argument("cannot open " + path);
}

int cmd_fit_marginal(const GlobalOpts& g, const std::string& data_path,
                     const std::string& column, const std::string& family) {
    require_file(data_path);
    riskkit::Table t = riskkit::load_csv(data_path);
    const auto& col = t.column(column);
    riskkit::Distribution d =
        riskkit::fit_marginal(col, riskkit::family_from_string(family));
    json out;
    out["family"] = riskkit::to_string(d.family);
    out["params"] = d.params;
    out["n"] = col.size();
    out["input_digest"] = riskkit::digest_hex(slurp(data_path));
    write_json(fs::path(g.out) / "marginal.json", out);
    std::cout << "fitted " << riskkit::to_string(d.family) << " on " << col.size()
              << " rows of column " << column << "\n";
    return kExitOk;
}

int cmd_fit_copula(const GlobalOpts& g, const std::string& data_path) {
    require_file(data_path);
    riskkit::Table t = riskkit::load_csv(data_path);
    const long n = static_cast<long>(t.rows()), d = static_cast<long>(t.columns.size());
    Eigen::MatrixXd u(n, d);
    for (long j = 0; j < d; ++j)
        for (long i = 0; i < n; ++i) u(i, j) = t.data[static_cast<size_t>(j)][static_cast<size_t>(i)];
    riskkit::CopulaModel m = riskkit::fit_gaussian_copula(u);
    riskkit::Table out;
    out.columns = t.columns;
    out.data.assign(t.columns.size(), {});
    for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j) out.data[static_cast<size_t>(j)].push_back(m.sigma(i, j));
    std::ostringstream ss;
    riskkit::save_csv(out, ss);
    write_file(fs::path(g.out) / "copula_sigma.csv", ss.str());
    std::cout << "fitted " << d << "-dimensional copula on " << n << " samples\n";
    return kExitOk;
}

int cmd_screen(const GlobalOpts& g, const std::string& responses_path) {
    json cfg = load_json(g.config);
    int k = cfg.at("k").get<int>();
    int replicates = cfg.value("replicates", 1);
    std::string type = cfg.at("type").get<std::string>();
    riskkit::DesignMatrix design;
    bool ofat = type == "ofat";
    if (ofat) {
        design = riskkit::ofat_design(k);
        // replicate the OFAT plan row-block-wise
        Eigen::MatrixXd rows(design.rows.rows() * replicates, k);
        for (int r = 0; r < replicates; ++r)
            rows.middleRows(r * design.rows.rows(), design.rows.rows()) = design.rows;
        design.rows = rows;
        design.replicates = replicates;
    } else if (type == "factorial") {
        design = riskkit::full_factorial_design(k, replicates);
    } else {
        throw std::invalid_argument("design type must be ofat or factorial");
    }

    require_file(responses_path);
    riskkit::Table rt = riskkit::load_csv(responses_path);
    const auto& y_col = rt.column(cfg.value("response", std::string("y")));
    if (static_cast<long>(y_col.size()) != design.rows.rows())
        throw std::invalid_argument("responses (" + std::to_string(y_col.size()) +
                                    " rows) do not align with the design (" +
                                    std::to_string(design.rows.rows()) + " runs)");
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(y_col.data(),
                                                          static_cast<long>(y_col.size()));

    riskkit::ModelTerms terms =
        ofat ? riskkit::main_effects_terms(k) : riskkit::main_and_interaction_terms(k);
    riskkit::RegressionModel model = riskkit::fit_linear_model(design.rows, terms, y, g.alpha);
    auto selected = riskkit::select_significant_terms(model, g.alpha);

    // Pareto CSV: term, coefficient, CI bounds, |coef| descending.
    std::ostringstream pareto;
    pareto << "term,beta,ci_low,ci_high\n";
    pareto.precision(17);
    for (const auto& s : selected)
        pareto << s.term.name << "," << s.beta << "," << s.ci_low << "," << s.ci_high << "\n";
    write_file(fs::path(g.out) / "pareto.csv", pareto.str());

    json rep;
    rep["design"] = type;
    rep["runs"] = design.rows.rows();
    rep["alpha"] = g.alpha;
    rep["r2"] = model.r2;
    json sel = json::array();
    for (const auto& s : selected) sel.push_back(s.term.name);
    rep["selected_terms"] = sel;
    if (ofat) rep["note"] = "interaction terms are not estimable from a one-factor-at-a-time plan";
    rep["input_digest"] = riskkit::digest_hex(slurp(responses_path));
    write_json(fs::path(g.out) / "screening.json", rep);
    std::cout << "selected " << selected.size() << " significant term(s)\n";
    return kExitOk;
}

int cmd_simulate(const GlobalOpts& g, int workers, bool dump_samples) {
    riskkit::ScenarioSpec spec = riskkit::parse_scenario(load_json(g.config));
    if (g.samples > 0) {
        spec.samples = g.samples;
        spec.raw["samples"] = g.samples;
    }
    if (g.seed > 0) {
        spec.seed = g.seed;
        spec.raw["seed"] = g.seed;
    }
    riskkit::RiskReport rep = riskkit::run_scenario(spec, workers);
    write_json(fs::path(g.out) / (spec.id + "_report.json"), rep.to_json());
    if (dump_samples) {
        riskkit::Table t;
        t.columns = rep.samples.columns;
        t.data = rep.samples.data;
        std::ostringstream ss;
        riskkit::save_csv(t, ss);
        write_file(fs::path(g.out) / (spec.id + "_samples.csv"), ss.str());
    }
    double half = 0.5 * (rep.estimate.ci_high - rep.estimate.ci_low);
    std::cout << spec.id << ": p = " << riskkit::format_pm(rep.estimate.p_hat, half)
              << ", lambda = " << riskkit::format_sig6(rep.estimate.lambda_hat) << " /h\n";
    return kExitOk;
}

int cmd_sa(const GlobalOpts& g, int workers) {
    riskkit::ScenarioSpec spec = riskkit::parse_scenario(load_json(g.config));
    if (g.samples > 0) spec.samples = g.samples;
    if (g.seed > 0) spec.seed = g.seed;
    riskkit::RiskReport rep = riskkit::run_scenario(spec, workers);
    riskkit::SaViews views = riskkit::export_sa_views(rep.samples, spec.risk_output);

    json indices;
    for (const auto& s : views.scatter) {
        std::vector<double> in;
        in.reserve(s.points.size());
        for (auto& p : s.points) in.push_back(p.first);
        try {
            indices[s.input] =
                riskkit::sobol_first_order(in, rep.samples.column(spec.risk_output));
        } catch (const std::invalid_argument&) {
            indices[s.input] = nullptr;  // constant column or too few samples
        }
    }
    write_json(fs::path(g.out) / (spec.id + "_sobol.json"), indices);

    for (const auto& s : views.scatter) {
        std::ostringstream ss;
        ss << s.input << "," << spec.risk_output << "\n";
        ss.precision(17);
        for (auto& p : s.points) ss << p.first << "," << p.second << "\n";
        write_file(fs::path(g.out) / (spec.id + "_scatter_" + s.input + ".csv"), ss.str());
    }

    std::ostringstream pc;
    for (size_t j = 0; j < views.axes.size(); ++j) pc << (j ? "," : "") << views.axes[j];
    pc << "\n# axis ranges:";
    for (const auto& r : views.ranges) pc << " " << r.name << "=[" << r.min << "," << r.max << "]";
    pc << "\n";
    pc.precision(17);
    for (const auto& row : views.parallel_rows) {
        for (size_t j = 0; j < row.size(); ++j) pc << (j ? "," : "") << row[j];
        pc << "\n";
    }
    write_file(fs::path(g.out) / (spec.id + "_parallel.csv"), pc.str());
    std::cout << "wrote sensitivity views for " << views.scatter.size() << " input(s)\n";
    return kExitOk;
}

int cmd_report(const GlobalOpts& g, const std::vector<std::string>& report_paths) {
    json rac_cfg = load_json(g.config);
    riskkit::RacSpec rac;
    rac.k_s = rac_cfg.at("k_s").get<double>();
    for (const auto& [k, v] : rac_cfg.at("lambda_human").items())
        rac.lambda_human[riskkit::detail::injury_level_from_string(k)] = v.get<double>();

    std::map<std::string, std::vector<std::pair<std::string, double>>> by_level;
    for (const auto& p : report_paths) {
        json r = load_json(p);
        double lam = std::strtod(
            r.at("estimate").at("lambda_hat_per_h").get<std::string>().c_str(), nullptr);
        by_level[r.at("injury_level").get<std::string>()].emplace_back(
            r.at("scenario_id").get<std::string>(), lam);
    }

    json out;
    out["tool"] = {{"name", "riskkit"}, {"version", riskkit::kVersion}};
    out["k_s"] = rac.k_s;
    for (const auto& [level_name, entries] : by_level) {
        riskkit::InjuryLevel level = riskkit::detail::injury_level_from_string(level_name);
        std::vector<double> lams;
        for (auto& e : entries) lams.push_back(e.second);
        riskkit::BudgetBreakdown b = riskkit::aggregate_budgets(lams, rac, level);
        json lv;
        lv["total_per_h"] = riskkit::format_sig6(b.total);
        lv["budget_per_h"] = riskkit::format_sig6(b.budget);
        lv["verdict"] = b.pass ? "pass" : "fail";
        json scen = json::array();
        for (size_t i = 0; i < entries.size(); ++i)
            scen.push_back({{"scenario_id", entries[i].first},
                            {"lambda_per_h", riskkit::format_sig6(entries[i].second)},
                            {"share", riskkit::format_sig6(b.shares[i])}});
        lv["scenarios"] = scen;
        out["levels"][level_name] = lv;
    }
    write_json(fs::path(g.out) / "risk_report.json", out);
    std::cout << "aggregated " << report_paths.size() << " scenario report(s)\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantitative safety-validation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // allow global options after the subcommand name

    GlobalOpts g;
    app.add_option("--seed", g.seed, "master random seed");
    app.add_option("--samples", g.samples, "sample count override");
    app.add_option("--alpha", g.alpha, "significance level")->default_val(0.05);
    app.add_option("--out", g.out, "output directory")->default_val(".");
    app.add_option("--config", g.config, "configuration file (JSON)");

    std::string data_path, column, family, responses_path;
    int workers = 1;
    bool dump_samples = false;
    std::vector<std::string> report_paths;

    auto* fit_m = app.add_subcommand("fit-marginal", "fit a parametric marginal to a CSV column");
    fit_m->add_option("--data", data_path, "input CSV")->required();
    fit_m->add_option("--column", column, "column name")->required();
    fit_m->add_option("--family", family, "distribution family")->required();

    auto* fit_c = app.add_subcommand("fit-copula", "fit a Gaussian copula to uniform columns");
    fit_c->add_option("--data", data_path, "input CSV of PIT-transformed samples")->required();

    auto* screen = app.add_subcommand("screen", "factor screening on a designed experiment");
    screen->add_option("--responses", responses_path, "response CSV aligned with the design")
        ->required();

    auto* sim = app.add_subcommand("simulate", "run a scenario spec and report the risk estimate");
    sim->add_option("--workers", workers, "sampling worker threads")->default_val(1);
    sim->add_flag("--dump-samples", dump_samples, "also write the sample table as CSV");

    auto* sa = app.add_subcommand("sa", "sensitivity analysis exports for a scenario");
    sa->add_option("--workers", workers, "sampling worker threads")->default_val(1);

    auto* rep = app.add_subcommand("report", "aggregate scenario reports against the RAC");
    rep->add_option("reports", report_paths, "scenario report JSON files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*fit_m) return cmd_fit_marginal(g, data_path, column, family);
        if (*fit_c) return cmd_fit_copula(g, data_path);
        if (*screen) {
            if (g.config.empty()) throw std::invalid_argument("screen requires --config");
            return cmd_screen(g, responses_path);
        }
        if (*sim) {
            if (g.config.empty()) throw std::invalid_argument("simulate requires --config");
            return cmd_simulate(g, workers, dump_samples);
        }
        if (*sa) {
            if (g.config.empty()) throw std::invalid_argument("sa requires --config");
            return cmd_sa(g, workers);
        }
        if (*rep) {
            if (g.config.empty()) throw std::invalid_argument("report requires --config");
            return cmd_report(g, report_paths);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
