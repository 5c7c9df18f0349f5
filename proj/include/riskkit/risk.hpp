#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskkit/bayesnet.hpp"

namespace riskkit {

enum class InjuryLevel { I1plus, I2plus, I3 };  // AIS >= 1 / >= 3 / >= 5

inline std::string to_string(InjuryLevel l) {
    switch (l) {
        case InjuryLevel::I1plus: return "I1+";
        case InjuryLevel::I2plus: return "I2+";
        case InjuryLevel::I3: return "I3";
    }
    return "?";
}

struct RiskEstimate {
    double p_hat = 0;     // mean injury probability
    double variance = 0;  // sample variance (n-1 divisor)
    size_t n = 0;
    double ci_low = 0, ci_high = 0;  // 95%, half-width 1.96*s/sqrt(n)
    double lambda_hat = std::numeric_limits<double>::quiet_NaN();  // lambda_s * p_hat, /h
};

struct RacSpec {
    std::map<InjuryLevel, double> lambda_human;  // /h
    double k_s;                                  // safety factor, required, > 1
};

// ---- Monte Carlo -------------------------------------------------------

inline RiskEstimate mcs_estimate(std::span<const double> g_values) {
    const size_t n = g_values.size();
    if (n < 2) throw std::invalid_argument("mcs_estimate: need at least 2 samples");
    double mean = 0;
    for (double g : g_values) {
        if (!(g >= 0.0 && g <= 1.0))
            throw std::invalid_argument("mcs_estimate: sample outside [0,1]");
        mean += g;
    }
    mean /= static_cast<double>(n);
    double s2 = 0;
    for (double g : g_values) s2 += (g - mean) * (g - mean);
    s2 /= static_cast<double>(n - 1);
    double half = 1.96 * std::sqrt(s2 / static_cast<double>(n));
    return {mean, s2, n, mean - half, mean + half,
            std::numeric_limits<double>::quiet_NaN()};
}

// ---- hazard algebra ----------------------------------------------------

// Injury rate of a hazard with scenario rate lambda_s /h (discrete mode).
inline double discrete_mode_risk(double lambda_s, double p_b, double p_c, double p_i) {
    return lambda_s * p_b * p_c * p_i;
}

// Injury rate with time proportion p_s and behavior rate lambda_b /h.
inline double continuous_mode_risk(double p_s, double lambda_b, double p_c, double p_i) {
    return p_s * lambda_b * p_c * p_i;
}

enum class HazardMode { discrete, continuous };

struct BudgetSolution {
    double value;  // p_b (discrete) or lambda_b (continuous)
    bool risk_acceptable_unmitigated = false;  // budget covers the hazard at p_b = 1
};

// Inverts the hazard product for the behavior factor given an injury-rate
// budget. In discrete mode the probability is clamped to 1.
inline BudgetSolution solve_behavior_budget(double lambda_budget, HazardMode mode,
                                            double rate_or_proportion, double p_c, double p_i) {
    double denom = rate_or_proportion * p_c * p_i;
    if (!(denom > 0)) throw std::invalid_argument("solve_behavior_budget: zero denominator");
    double v = lambda_budget / denom;
    if (mode == HazardMode::discrete && v >= 1.0) return {1.0, true};
    return {v, false};
}

// Positive risk balance: pass iff k_s * lambda_system < lambda_human, strictly.
inline std::map<InjuryLevel, bool> prb_check(
    const std::map<InjuryLevel, double>& lambda_system, const RacSpec& rac) {
    if (!(rac.k_s > 1)) throw std::invalid_argument("prb_check: safety factor must exceed 1");
    std::map<InjuryLevel, bool> verdict;
    for (const auto& [level, lam] : lambda_system) {
        auto it = rac.lambda_human.find(level);
        if (it == rac.lambda_human.end())
            throw std::invalid_argument("prb_check: no human baseline for " + to_string(level));
        verdict[level] = rac.k_s * lam < it->second;
    }
    return verdict;
}

// ---- integrity level lookup --------------------------------------------

enum class SilMetric { pfh, pfd };

// IEC-style bins, [low, high): a boundary value takes the more demanding
// level. Returns 1..4, or 0 when the metric falls outside the table.
inline int sil_lookup(SilMetric metric, double value) {
    if (!(value > 0)) throw std::invalid_argument("sil_lookup: metric must be positive");
    double lo = metric == SilMetric::pfh ? 1e-9 : 1e-5;
    for (int level = 4; level >= 1; --level) {
        if (value >= lo && value < lo * 10) return level;
        lo *= 10;
    }
    return 0;
}

// ---- redundancy --------------------------------------------------------

// Failure probability of a 2-out-of-3 voter over independent channels.
inline double two_oo_three_failure(double p1, double p2, double p3) {
    for (double p : {p1, p2, p3})
        if (!(p >= 0 && p <= 1))
            throw std::invalid_argument("two_oo_three_failure: probabilities in [0,1]");
    return p1 * p2 + p1 * p3 + p2 * p3 - 2 * p1 * p2 * p3;
}

// ---- budget aggregation --------------------------------------------------

struct BudgetBreakdown {
    double total = 0;                  // sum of per-hazard injury rates, /h
    std::vector<double> shares;        // fraction of the total per hazard
    double budget = 0;                 // lambda_human / k_s
    bool pass = true;                  // total < budget, strictly
};

inline BudgetBreakdown aggregate_budgets(std::span<const double> lambda_per_hazard,
                                         const RacSpec& rac, InjuryLevel level) {
    BudgetBreakdown b;
    for (double lam : lambda_per_hazard) {
        if (lam < 0) throw std::invalid_argument("aggregate_budgets: negative rate");
        b.total += lam;
    }
    for (double lam : lambda_per_hazard)
        b.shares.push_back(b.total > 0 ? lam / b.total : 0.0);
    b.budget = rac.lambda_human.at(level) / rac.k_s;
    b.pass = b.total < b.budget;
    return b;
}

// ---- sensitivity analysis ------------------------------------------------

// First-order index via a rank-binned conditional-expectation estimator over
// a single joint sample: S = Var_bins(bin mean of Y) / Var(Y).
inline double sobol_first_order(std::span<const double> input, std::span<const double> output,
                                int bins = 50) {
    const size_t n = input.size();
    if (n != output.size()) throw std::invalid_argument("sobol_first_order: length mismatch");
    if (n < 1000) throw std::invalid_argument("sobol_first_order: need at least 1000 samples");
    double ymean = std::accumulate(output.begin(), output.end(), 0.0) / static_cast<double>(n);
    double yvar = 0;
    for (double y : output) yvar += (y - ymean) * (y - ymean);
    yvar /= static_cast<double>(n - 1);
    if (!(yvar > 0)) throw std::invalid_argument("sobol_first_order: zero output variance");

    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return input[a] < input[b]; });

    // equal-count bins over the input ranks
    double between = 0;
    for (int b = 0; b < bins; ++b) {
        size_t lo = n * static_cast<size_t>(b) / static_cast<size_t>(bins);
        size_t hi = n * static_cast<size_t>(b + 1) / static_cast<size_t>(bins);
        if (hi <= lo) continue;
        double m = 0;
        for (size_t i = lo; i < hi; ++i) m += output[idx[i]];
        m /= static_cast<double>(hi - lo);
        between += static_cast<double>(hi - lo) * (m - ymean) * (m - ymean);
    }
    between /= static_cast<double>(n);
    return between / yvar;
}

inline double sobol_first_order(const SampleTable& table, const std::string& input,
                                const std::string& output, int bins = 50) {
    return sobol_first_order(table.column(input), table.column(output), bins);
}

// Central finite differences of a model over a parameter vector; the
// sigma-normalized variant scales each component by the input's std dev.
inline std::vector<double> local_sensitivity(
    const std::function<double(std::span<const double>)>& fn, std::span<const double> point,
    std::span<const double> steps, std::span<const double> sigma = {}) {
    if (point.size() != steps.size())
        throw std::invalid_argument("local_sensitivity: step count mismatch");
    std::vector<double> grad(point.size());
    std::vector<double> x(point.begin(), point.end());
    for (size_t i = 0; i < point.size(); ++i) {
        double h = steps[i];
        if (!(h > 0)) throw std::invalid_argument("local_sensitivity: steps must be positive");
        x[i] = point[i] + h;
        double fp = fn(x);
        x[i] = point[i] - h;
        double fm = fn(x);
        x[i] = point[i];
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("local_sensitivity: evaluation failed at probe point " +
                                     std::to_string(i));
        grad[i] = (fp - fm) / (2 * h);
        if (!sigma.empty()) grad[i] *= sigma[i];
    }
    return grad;
}

// ---- visual-SA exports ----------------------------------------------------

struct ScatterSet {
    std::string input;
    std::vector<std::pair<double, double>> points;  // (input, output)
};

struct AxisRange {
    std::string name;
    double min, max;
};

struct SaViews {
    std::vector<ScatterSet> scatter;
    // rows normalized to [0,1] per axis; sorted ascending by output so the
    // darkest (highest-risk) lines plot last
    std::vector<std::string> axes;
    std::vector<AxisRange> ranges;
    std::vector<std::vector<double>> parallel_rows;
    std::vector<double> row_output;
};

inline SaViews export_sa_views(const SampleTable& table, const std::string& output) {
    if (table.rows() == 0) throw std::invalid_argument("export_sa_views: empty table");
    SaViews v;
    const auto& out = table.column(output);
    for (size_t j = 0; j < table.columns.size(); ++j) {
        if (table.columns[j] == output) continue;
        ScatterSet s{table.columns[j], {}};
        for (size_t i = 0; i < table.rows(); ++i) s.points.emplace_back(table.data[j][i], out[i]);
        v.scatter.push_back(std::move(s));
    }
    v.axes = table.columns;
    for (size_t j = 0; j < table.columns.size(); ++j) {
        auto [mn, mx] = std::minmax_element(table.data[j].begin(), table.data[j].end());
        v.ranges.push_back({table.columns[j], *mn, *mx});
    }
    std::vector<size_t> order(table.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return out[a] < out[b]; });
    for (size_t i : order) {
        std::vector<double> row;
        for (size_t j = 0; j < table.columns.size(); ++j) {
            double span = v.ranges[j].max - v.ranges[j].min;
            row.push_back(span > 0 ? (table.data[j][i] - v.ranges[j].min) / span : 0.5);
        }
        v.parallel_rows.push_back(std::move(row));
        v.row_output.push_back(out[i]);
    }
    return v;
}

}  // namespace riskkit
