#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "riskkit/rng.hpp"

namespace riskkit {

struct FactorSpec {
    std::string name;
    double low;   // coded -1
    double high;  // coded +1
    std::string unit;
};

// Coded experiment plan; rows are in execution order, run_order[i] gives the
// index of run i in the standard-order design.
struct DesignMatrix {
    Eigen::MatrixXd rows;  // runs x factors, entries in {-1,+1} (coded)
    int replicates = 1;
    std::vector<int> run_order;
};

// One regressor: a product of factor columns, each optionally passed through
// |.|; an empty factor list is the intercept.
struct Term {
    std::string name;
    std::vector<int> factors;
    std::vector<bool> absolute;

    double eval(const Eigen::RowVectorXd& x) const {
        double v = 1.0;
        for (size_t i = 0; i < factors.size(); ++i) {
            double f = x[factors[i]];
            v *= absolute[i] ? std::abs(f) : f;
        }
        return v;
    }
};

inline Term intercept_term() { return {"1", {}, {}}; }
inline Term main_term(int j, const std::string& name) { return {name, {j}, {false}}; }
inline Term abs_term(int j, const std::string& name) {
    return {"abs(" + name + ")", {j}, {true}};
}
inline Term interaction_term(int i, int j, const std::string& ni, const std::string& nj) {
    return {ni + "*" + nj, {i, j}, {false, false}};
}

using ModelTerms = std::vector<Term>;

// Intercept + all mains, in factor order.
inline ModelTerms main_effects_terms(int k) {
    ModelTerms t{intercept_term()};
    for (int j = 0; j < k; ++j) t.push_back(main_term(j, "x" + std::to_string(j + 1)));
    return t;
}

// Intercept + mains + all two-factor interactions.
inline ModelTerms main_and_interaction_terms(int k) {
    ModelTerms t = main_effects_terms(k);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            t.push_back(interaction_term(i, j, "x" + std::to_string(i + 1),
                                         "x" + std::to_string(j + 1)));
    return t;
}

struct RegressionModel {
    ModelTerms terms;
    Eigen::VectorXd beta;
    double sigma = 0;  // residual standard deviation
    Eigen::VectorXd ci_low, ci_high;
    Eigen::VectorXd residuals;
    Eigen::VectorXd fitted;
    double r2 = 0;
    int dof = 0;
    double alpha = 0.05;
    bool degenerate = false;  // exact fit or zero-variance response
    std::vector<int> run_order;
};

// ---- designs ----------------------------------------------------------

inline DesignMatrix ofat_design(int k) {
    if (k < 1) throw std::invalid_argument("ofat_design: need at least one factor");
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(k + 1, k, -1.0);
    for (int j = 0; j < k; ++j) m(j + 1, j) = 1.0;
    DesignMatrix d{m, 1, {}};
    d.run_order.resize(static_cast<size_t>(k) + 1);
    std::iota(d.run_order.begin(), d.run_order.end(), 0);
    return d;
}

inline DesignMatrix full_factorial_design(int k, int replicates, bool randomize = false,
                                          RngStream* rng = nullptr) {
    if (k < 1 || replicates < 1)
        throw std::invalid_argument("full_factorial_design: k and replicates must be >= 1");
    if (k > 30) throw std::invalid_argument("full_factorial_design: k > 30 would overflow");
    const long runs = (1L << k) * replicates;
    Eigen::MatrixXd m(runs, k);
    for (long r = 0; r < runs; ++r) {
        long cell = r % (1L << k);
        for (int j = 0; j < k; ++j) m(r, j) = (cell >> j) & 1 ? 1.0 : -1.0;
    }
    DesignMatrix d{std::move(m), replicates, {}};
    d.run_order.resize(static_cast<size_t>(runs));
    std::iota(d.run_order.begin(), d.run_order.end(), 0);
    if (randomize) {
        if (!rng) throw std::invalid_argument("randomized design needs an rng stream");
        // Fisher-Yates over run order; the design content is unchanged.
        for (long i = runs - 1; i > 0; --i) {
            long j = static_cast<long>(rng->next_u64() % static_cast<std::uint64_t>(i + 1));
            std::swap(d.run_order[static_cast<size_t>(i)], d.run_order[static_cast<size_t>(j)]);
        }
        Eigen::MatrixXd perm(runs, k);
        for (long i = 0; i < runs; ++i) perm.row(i) = d.rows.row(d.run_order[static_cast<size_t>(i)]);
        d.rows = std::move(perm);
    }
    return d;
}

// Affine map -1 -> low, +1 -> high per column.
inline Eigen::MatrixXd decode_design(const DesignMatrix& design,
                                     const std::vector<FactorSpec>& factors) {
    if (design.rows.cols() != static_cast<long>(factors.size()))
        throw std::invalid_argument("decode_design: factor count mismatch");
    Eigen::MatrixXd out = design.rows;
    for (long j = 0; j < out.cols(); ++j) {
        const auto& f = factors[static_cast<size_t>(j)];
        if (!(f.low < f.high))
            throw std::invalid_argument("decode_design: factor " + f.name + " needs low < high");
        double mid = 0.5 * (f.low + f.high), half = 0.5 * (f.high - f.low);
        out.col(j) = (out.col(j).array() * half + mid).matrix();
    }
    return out;
}

inline Eigen::MatrixXd encode_design(const Eigen::MatrixXd& physical,
                                     const std::vector<FactorSpec>& factors) {
    Eigen::MatrixXd out = physical;
    for (long j = 0; j < out.cols(); ++j) {
        const auto& f = factors[static_cast<size_t>(j)];
        double mid = 0.5 * (f.low + f.high), half = 0.5 * (f.high - f.low);
        out.col(j) = ((out.col(j).array() - mid) / half).matrix();
    }
    return out;
}

// ---- regression -------------------------------------------------------

inline Eigen::MatrixXd build_regressors(const Eigen::MatrixXd& design_rows,
                                        const ModelTerms& terms) {
    Eigen::MatrixXd X(design_rows.rows(), static_cast<long>(terms.size()));
    for (long i = 0; i < design_rows.rows(); ++i) {
        Eigen::RowVectorXd row = design_rows.row(i);
        for (size_t t = 0; t < terms.size(); ++t)
            X(i, static_cast<long>(t)) = terms[t].eval(row);
    }
    return X;
}

// Ordinary least squares with t-based coefficient intervals (n-p dof).
inline RegressionModel fit_linear_model(const Eigen::MatrixXd& design_rows,
                                        const ModelTerms& terms, const Eigen::VectorXd& y,
                                        double alpha = 0.05) {
    const long n = design_rows.rows();
    const long p = static_cast<long>(terms.size());
    if (n < p)
        throw std::invalid_argument("fit_linear_model: need at least as many runs as terms");
    Eigen::MatrixXd X = build_regressors(design_rows, terms);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
        // Name the columns past the numerical rank in pivot order.
        std::string cols;
        auto piv = qr.colsPermutation().indices();
        for (long j = qr.rank(); j < p; ++j) {
            if (!cols.empty()) cols += ", ";
            cols += terms[static_cast<size_t>(piv[j])].name;
        }
        throw std::invalid_argument("fit_linear_model: rank-deficient design; collinear terms: " +
                                    cols);
    }

    RegressionModel m;
    m.terms = terms;
    m.alpha = alpha;
    m.beta = qr.solve(y);
    m.fitted = X * m.beta;
    m.residuals = y - m.fitted;
    m.dof = static_cast<int>(n - p);

    double ss_res = m.residuals.squaredNorm();
    double ybar = y.mean();
    double ss_tot = (y.array() - ybar).square().sum();
    if (ss_tot <= 1e-300) {
        m.r2 = 0.0;  // zero-variance response: R^2 defined as 0
        m.degenerate = true;
    } else {
        m.r2 = 1.0 - ss_res / ss_tot;
    }
    m.sigma = m.dof > 0 ? std::sqrt(std::max(ss_res, 0.0) / m.dof) : 0.0;
    if (m.sigma < 1e-12 * std::max(1.0, std::abs(ybar))) m.degenerate = true;

    m.ci_low.resize(p);
    m.ci_high.resize(p);
    if (m.dof > 0) {
        Eigen::MatrixXd xtx_inv =
            (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
        double tcrit = boost::math::quantile(boost::math::students_t_distribution<>(m.dof),
                                             1.0 - alpha / 2.0);
        for (long j = 0; j < p; ++j) {
            double se = m.sigma * std::sqrt(std::max(xtx_inv(j, j), 0.0));
            m.ci_low[j] = m.beta[j] - tcrit * se;
            m.ci_high[j] = m.beta[j] + tcrit * se;
        }
    } else {
        // saturated (exact) fit: no residual dof, intervals collapse
        m.ci_low = m.beta;
        m.ci_high = m.beta;
        m.degenerate = true;
    }
    m.run_order.resize(static_cast<size_t>(n));
    std::iota(m.run_order.begin(), m.run_order.end(), 0);
    return m;
}

struct SelectedTerm {
    Term term;
    double beta;
    double ci_low, ci_high;
    double p_value;
};

namespace detail {

inline double term_p_value(const RegressionModel& m, long j, double tcrit) {
    double half = 0.5 * (m.ci_high[j] - m.ci_low[j]);
    if (half <= 0) return m.beta[j] == 0 ? 1.0 : 0.0;
    double se = half / tcrit;
    double t = std::abs(m.beta[j]) / se;
    return 2.0 * boost::math::cdf(
                     boost::math::complement(boost::math::students_t_distribution<>(m.dof), t));
}

}  // namespace detail

// Non-intercept terms whose CI excludes zero, largest |beta| first
// (Pareto-chart order); declaration order breaks exact ties.
inline std::vector<SelectedTerm> select_significant_terms(const RegressionModel& m,
                                                          double alpha = 0.05) {
    if (m.dof < 1) throw std::invalid_argument("select_significant_terms: no residual dof");
    if (m.degenerate)
        throw std::invalid_argument(
            "select_significant_terms: degenerate (exact) fit, every nonzero term significant");
    double tcrit = boost::math::quantile(boost::math::students_t_distribution<>(m.dof),
                                         1.0 - alpha / 2.0);
    std::vector<SelectedTerm> out;
    for (size_t j = 0; j < m.terms.size(); ++j) {
        if (m.terms[j].factors.empty()) continue;  // intercept
        long lj = static_cast<long>(j);
        // CI at the requested level (refit half-width from the stored one)
        double se = 0.5 * (m.ci_high[lj] - m.ci_low[lj]) /
                    boost::math::quantile(boost::math::students_t_distribution<>(m.dof),
                                          1.0 - m.alpha / 2.0);
        double lo = m.beta[lj] - tcrit * se, hi = m.beta[lj] + tcrit * se;
        if (lo > 0 || hi < 0)
            out.push_back({m.terms[j], m.beta[lj], lo, hi, detail::term_p_value(m, lj, tcrit)});
    }
    std::stable_sort(out.begin(), out.end(), [](const SelectedTerm& a, const SelectedTerm& b) {
        return std::abs(a.beta) > std::abs(b.beta);
    });
    return out;
}

// Iteratively drops the least significant term (largest p-value) until every
// remaining non-intercept term is significant at level alpha.
inline RegressionModel backward_eliminate(const Eigen::MatrixXd& design_rows,
                                          ModelTerms terms, const Eigen::VectorXd& y,
                                          double alpha = 0.05) {
    while (true) {
        RegressionModel m = fit_linear_model(design_rows, terms, y, alpha);
        double tcrit = boost::math::quantile(boost::math::students_t_distribution<>(m.dof),
                                             1.0 - alpha / 2.0);
        long worst = -1;
        double worst_p = alpha;
        for (size_t j = 0; j < terms.size(); ++j) {
            if (terms[j].factors.empty()) continue;
            double p = detail::term_p_value(m, static_cast<long>(j), tcrit);
            if (p > worst_p) {
                worst_p = p;
                worst = static_cast<long>(j);
            }
        }
        if (worst < 0) return m;
        terms.erase(terms.begin() + worst);
    }
}

// ---- diagnostics ------------------------------------------------------

struct ResidualReport {
    // sorted residuals paired with standard-normal plotting quantiles
    std::vector<std::pair<double, double>> qq;  // (theoretical, observed)
    std::vector<std::pair<double, double>> resid_vs_fitted;
    std::vector<std::pair<int, double>> resid_vs_run_order;
    double r2 = 0;
    double qq_correlation = 0;
    bool lack_of_fit = false;
    bool has_replicates = false;
};

inline ResidualReport diagnostics(const RegressionModel& m, int replicates = 1) {
    ResidualReport rep;
    const long n = m.residuals.size();
    rep.r2 = m.r2;

    std::vector<double> sorted(m.residuals.data(), m.residuals.data() + n);
    std::sort(sorted.begin(), sorted.end());
    boost::math::normal_distribution<> std_normal;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (long i = 0; i < n; ++i) {
        double q = boost::math::quantile(std_normal, (static_cast<double>(i) + 0.5) / n);
        rep.qq.emplace_back(q, sorted[static_cast<size_t>(i)]);
        sx += q;
        sy += sorted[static_cast<size_t>(i)];
        sxx += q * q;
        syy += sorted[static_cast<size_t>(i)] * sorted[static_cast<size_t>(i)];
        sxy += q * sorted[static_cast<size_t>(i)];
    }
    double cov = sxy - sx * sy / n;
    double vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
    rep.qq_correlation = (vx > 0 && vy > 0) ? cov / std::sqrt(vx * vy) : 1.0;

    for (long i = 0; i < n; ++i) {
        rep.resid_vs_fitted.emplace_back(m.fitted[i], m.residuals[i]);
        int order = i < static_cast<long>(m.run_order.size()) ? m.run_order[static_cast<size_t>(i)]
                                                              : static_cast<int>(i);
        rep.resid_vs_run_order.emplace_back(order, m.residuals[i]);
    }

    rep.has_replicates = replicates > 1;
    if (rep.has_replicates && !m.degenerate) {
        // Pure-error F check: compare model sigma against replicate scatter.
        // Grouping key is the fitted value (identical design rows share it).
        std::vector<std::pair<double, double>> by_fit;
        for (long i = 0; i < n; ++i) by_fit.emplace_back(m.fitted[i], m.residuals[i] + m.fitted[i]);
        std::sort(by_fit.begin(), by_fit.end());
        double ss_pe = 0;
        long dof_pe = 0;
        size_t i = 0;
        while (i < by_fit.size()) {
            size_t j = i;
            while (j < by_fit.size() && std::abs(by_fit[j].first - by_fit[i].first) < 1e-9) ++j;
            long g = static_cast<long>(j - i);
            if (g > 1) {
                double mean = 0;
                for (size_t l = i; l < j; ++l) mean += by_fit[l].second;
                mean /= g;
                for (size_t l = i; l < j; ++l)
                    ss_pe += (by_fit[l].second - mean) * (by_fit[l].second - mean);
                dof_pe += g - 1;
            }
            i = j;
        }
        if (dof_pe > 0) {
            double ss_res = m.residuals.squaredNorm();
            double ss_lof = std::max(ss_res - ss_pe, 0.0);
            long dof_lof = m.dof - dof_pe;
            if (dof_lof > 0 && ss_pe > 0) {
                double f = (ss_lof / dof_lof) / (ss_pe / dof_pe);
                rep.lack_of_fit = f > 4.0;  // coarse flag, not a calibrated test
            }
        }
    }
    return rep;
}

}  // namespace riskkit
