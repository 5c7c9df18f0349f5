#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "riskkit/optim.hpp"
#include "riskkit/rng.hpp"

namespace riskkit {

enum class Family {
    uniform,      // {low, high}
    normal,       // {mean, stddev}
    lognormal,    // {log_mean, log_stddev}
    exponential,  // {rate}
    gamma,        // {shape, scale}
    student_t,    // {location, scale, dof}
    gev,          // {location, scale, shape}
    beta,         // {alpha, beta}
    categorical,  // {p_0, ..., p_{K-1}}, values are the labels 0..K-1
};

inline std::string to_string(Family f) {
    switch (f) {
        case Family::uniform: return "uniform";
        case Family::normal: return "normal";
        case Family::lognormal: return "lognormal";
        case Family::exponential: return "exponential";
        case Family::gamma: return "gamma";
        case Family::student_t: return "student_t";
        case Family::gev: return "gev";
        case Family::beta: return "beta";
        case Family::categorical: return "categorical";
    }
    return "?";
}

inline Family family_from_string(std::string_view s) {
    if (s == "uniform") return Family::uniform;
    if (s == "normal") return Family::normal;
    if (s == "lognormal") return Family::lognormal;
    if (s == "exponential") return Family::exponential;
    if (s == "gamma") return Family::gamma;
    if (s == "student_t" || s == "t") return Family::student_t;
    if (s == "gev") return Family::gev;
    if (s == "beta") return Family::beta;
    if (s == "categorical") return Family::categorical;
    throw std::invalid_argument("unknown distribution family: " + std::string(s));
}

// Parametric univariate law. Parameters are in SI units of the modeled
// quantity; immutable after construction.
struct Distribution {
    Family family;
    std::vector<double> params;
};

namespace detail {

inline void check_params(const Distribution& d) {
    const auto& p = d.params;
    auto fail = [&](const char* msg) {
        throw std::invalid_argument(std::string("invalid ") + to_string(d.family) +
                                    " parameters: " + msg);
    };
    switch (d.family) {
        case Family::uniform:
            if (p.size() != 2 || !(p[0] < p[1])) fail("need low < high");
            break;
        case Family::normal:
        case Family::lognormal:
            if (p.size() != 2 || !(p[1] > 0)) fail("need stddev > 0");
            break;
        case Family::exponential:
            if (p.size() != 1 || !(p[0] > 0)) fail("need rate > 0");
            break;
        case Family::gamma:
            if (p.size() != 2 || !(p[0] > 0) || !(p[1] > 0)) fail("need shape, scale > 0");
            break;
        case Family::student_t:
            if (p.size() != 3 || !(p[1] > 0) || !(p[2] > 0)) fail("need scale, dof > 0");
            break;
        case Family::gev:
            if (p.size() != 3 || !(p[1] > 0)) fail("need scale > 0");
            break;
        case Family::beta:
            if (p.size() != 2 || !(p[0] > 0) || !(p[1] > 0)) fail("need alpha, beta > 0");
            break;
        case Family::categorical: {
            if (p.empty()) fail("need at least one probability");
            double sum = 0;
            for (double q : p) {
                if (q < 0) fail("negative probability");
                sum += q;
            }
            if (std::abs(sum - 1.0) > 1e-9) fail("probabilities must sum to 1");
            break;
        }
    }
}

}  // namespace detail

// ---- densities -------------------------------------------------------

inline double pdf(const Distribution& d, double x) {
    const auto& p = d.params;
    switch (d.family) {
        case Family::uniform:
            return (x < p[0] || x > p[1]) ? 0.0 : 1.0 / (p[1] - p[0]);
        case Family::normal:
            return boost::math::pdf(boost::math::normal_distribution<>(p[0], p[1]), x);
        case Family::lognormal: {
            if (x <= 0) return 0.0;
            double z = (std::log(x) - p[0]) / p[1];
            return std::exp(-0.5 * z * z) / (x * p[1] * std::sqrt(2 * M_PI));
        }
        case Family::exponential:
            return x < 0 ? 0.0 : p[0] * std::exp(-p[0] * x);
        case Family::gamma:
            if (x < 0) return 0.0;
            return boost::math::pdf(boost::math::gamma_distribution<>(p[0], p[1]), x);
        case Family::student_t: {
            double z = (x - p[0]) / p[1];
            return boost::math::pdf(boost::math::students_t_distribution<>(p[2]), z) / p[1];
        }
        case Family::gev: {
            double mu = p[0], sigma = p[1], xi = p[2];
            double z = (x - mu) / sigma;
            if (std::abs(xi) < 1e-12) {
                double t = std::exp(-z);
                return t * std::exp(-t) / sigma;
            }
            double a = 1 + xi * z;
            if (a <= 0) return 0.0;
            double t = std::pow(a, -1.0 / xi);
            return std::pow(a, -1.0 / xi - 1.0) * std::exp(-t) / sigma;
        }
        case Family::beta:
            if (x <= 0 || x >= 1) return 0.0;
            return boost::math::pdf(boost::math::beta_distribution<>(p[0], p[1]), x);
        case Family::categorical: {
            long k = std::lround(x);
            if (k < 0 || k >= static_cast<long>(p.size()) || std::abs(x - k) > 1e-9) return 0.0;
            return p[static_cast<size_t>(k)];
        }
    }
    return 0.0;
}

inline double log_pdf(const Distribution& d, double x) {
    double v = pdf(d, x);
    return v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();
}

// ---- cdf / quantile --------------------------------------------------

// Clamps outside the support to 0/1.
inline double cdf(const Distribution& d, double x) {
    const auto& p = d.params;
    switch (d.family) {
        case Family::uniform:
            return std::clamp((x - p[0]) / (p[1] - p[0]), 0.0, 1.0);
        case Family::normal:
            return boost::math::cdf(boost::math::normal_distribution<>(p[0], p[1]), x);
        case Family::lognormal:
            if (x <= 0) return 0.0;
            return boost::math::cdf(boost::math::normal_distribution<>(p[0], p[1]), std::log(x));
        case Family::exponential:
            return x <= 0 ? 0.0 : -std::expm1(-p[0] * x);
        case Family::gamma:
            if (x <= 0) return 0.0;
            return boost::math::cdf(boost::math::gamma_distribution<>(p[0], p[1]), x);
        case Family::student_t:
            return boost::math::cdf(boost::math::students_t_distribution<>(p[2]),
                                    (x - p[0]) / p[1]);
        case Family::gev: {
            double mu = p[0], sigma = p[1], xi = p[2];
            double z = (x - mu) / sigma;
            if (std::abs(xi) < 1e-12) return std::exp(-std::exp(-z));
            double a = 1 + xi * z;
            if (a <= 0) return xi > 0 ? 0.0 : 1.0;
            return std::exp(-std::pow(a, -1.0 / xi));
        }
        case Family::beta:
            if (x <= 0) return 0.0;
            if (x >= 1) return 1.0;
            return boost::math::cdf(boost::math::beta_distribution<>(p[0], p[1]), x);
        case Family::categorical: {
            double acc = 0;
            for (size_t k = 0; k < p.size(); ++k) {
                if (x < static_cast<double>(k) - 1e-9) break;
                acc += p[k];
            }
            return std::min(acc, 1.0);
        }
    }
    return 0.0;
}

inline double quantile(const Distribution& d, double u) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("quantile: u must lie strictly inside (0,1)");
    const auto& p = d.params;
    switch (d.family) {
        case Family::uniform:
            return p[0] + u * (p[1] - p[0]);
        case Family::normal:
            return boost::math::quantile(boost::math::normal_distribution<>(p[0], p[1]), u);
        case Family::lognormal:
            return std::exp(
                boost::math::quantile(boost::math::normal_distribution<>(p[0], p[1]), u));
        case Family::exponential:
            return -std::log1p(-u) / p[0];
        case Family::gamma:
            return boost::math::quantile(boost::math::gamma_distribution<>(p[0], p[1]), u);
        case Family::student_t:
            return p[0] + p[1] * boost::math::quantile(
                                     boost::math::students_t_distribution<>(p[2]), u);
        case Family::gev: {
            double mu = p[0], sigma = p[1], xi = p[2];
            double l = -std::log(u);
            if (std::abs(xi) < 1e-12) return mu - sigma * std::log(l);
            return mu + sigma * (std::pow(l, -xi) - 1.0) / xi;
        }
        case Family::beta:
            return boost::math::quantile(boost::math::beta_distribution<>(p[0], p[1]), u);
        case Family::categorical: {
            double acc = 0;
            for (size_t k = 0; k < p.size(); ++k) {
                acc += p[k];
                if (u <= acc) return static_cast<double>(k);
            }
            return static_cast<double>(p.size() - 1);
        }
    }
    return 0.0;
}

// ---- sampling --------------------------------------------------------

inline double sample_one(const Distribution& d, RngStream& rng) {
    return quantile(d, rng.uniform01());
}

// Inverse-transform sampling; deterministic for a fixed stream.
inline std::vector<double> sample(const Distribution& d, size_t n, RngStream& rng) {
    std::vector<double> out(n);
    for (auto& x : out) x = sample_one(d, rng);
    return out;
}

// Element-wise cdf application (probability integral transform).
inline std::vector<double> pit_transform(std::span<const double> data, const Distribution& d) {
    std::vector<double> out(data.size());
    for (size_t i = 0; i < data.size(); ++i) out[i] = cdf(d, data[i]);
    return out;
}

// ---- fitting ---------------------------------------------------------

namespace detail {

inline size_t family_param_count(Family f) {
    switch (f) {
        case Family::exponential: return 1;
        case Family::uniform:
        case Family::normal:
        case Family::lognormal:
        case Family::gamma:
        case Family::beta: return 2;
        case Family::student_t:
        case Family::gev: return 3;
        case Family::categorical: return 2;  // at least two labels
    }
    return 0;
}

inline void require_positive(std::span<const double> x, const char* family) {
    for (double v : x)
        if (!(v > 0))
            throw std::invalid_argument(std::string(family) +
                                        " fit: data must be strictly positive");
}

inline double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double var_of(std::span<const double> x, double m) {
    double s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

// MLE of the gamma shape by Newton iteration on ln(k) - psi(k) = s.
inline double gamma_shape_mle(double s) {
    double k = (3 - s + std::sqrt((s - 3) * (s - 3) + 24 * s)) / (12 * s);
    for (int i = 0; i < 100; ++i) {
        double f = std::log(k) - boost::math::digamma(k) - s;
        double fp = 1.0 / k - boost::math::trigamma(k);
        double step = f / fp;
        k -= step;
        if (k <= 0) k = 1e-8;
        if (std::abs(step) < 1e-12 * std::max(1.0, k)) break;
    }
    return k;
}

inline Distribution fit_numeric_mle(Family family, std::span<const double> x,
                                    Eigen::VectorXd init,
                                    const std::function<Distribution(const Eigen::VectorXd&)>&
                                        decode) {
    auto nll = [&](const Eigen::VectorXd& theta) {
        Distribution d = decode(theta);
        double s = 0;
        for (double v : x) {
            double lp = log_pdf(d, v);
            if (!std::isfinite(lp)) return std::numeric_limits<double>::infinity();
            s -= lp;
        }
        return s;
    };
    OptimResult r = minimize_bfgs(nll, std::move(init), 1e-8 * static_cast<double>(x.size()));
    return decode(r.x);
}

}  // namespace detail

// Maximum-likelihood fit; closed form where it exists, quasi-Newton otherwise.
inline Distribution fit_marginal(std::span<const double> data, Family family) {
    using detail::mean_of;
    const size_t n = data.size();
    if (n < detail::family_param_count(family) + 1)
        throw std::invalid_argument("fit_marginal: too few data points for " +
                                    to_string(family));

    const auto [mn_it, mx_it] = std::minmax_element(data.begin(), data.end());
    const double mn = *mn_it, mx = *mx_it;
    if (family != Family::categorical && !(mn < mx))
        throw std::invalid_argument("fit_marginal: degenerate (all-equal) data");

    switch (family) {
        case Family::uniform:
            return {family, {mn, mx}};
        case Family::normal: {
            double m = mean_of(data);
            double s2 = 0;
            for (double v : data) s2 += (v - m) * (v - m);
            return {family, {m, std::sqrt(s2 / static_cast<double>(n))}};
        }
        case Family::lognormal: {
            detail::require_positive(data, "lognormal");
            std::vector<double> lx(n);
            std::transform(data.begin(), data.end(), lx.begin(),
                           [](double v) { return std::log(v); });
            return {family, {mean_of(lx), std::sqrt([&] {
                                 double m = mean_of(lx), s2 = 0;
                                 for (double v : lx) s2 += (v - m) * (v - m);
                                 return s2 / static_cast<double>(n);
                             }())}};
        }
        case Family::exponential: {
            for (double v : data)
                if (v < 0)
                    throw std::invalid_argument("exponential fit: data must be non-negative");
            return {family, {1.0 / mean_of(data)}};
        }
        case Family::gamma: {
            detail::require_positive(data, "gamma");
            double m = mean_of(data);
            double mlog = 0;
            for (double v : data) mlog += std::log(v);
            mlog /= static_cast<double>(n);
            double s = std::log(m) - mlog;
            double shape = detail::gamma_shape_mle(s);
            return {family, {shape, m / shape}};
        }
        case Family::beta: {
            for (double v : data)
                if (!(v > 0 && v < 1))
                    throw std::invalid_argument("beta fit: data must lie in (0,1)");
            double m = mean_of(data), v = detail::var_of(data, m);
            double c = m * (1 - m) / v - 1;
            Eigen::VectorXd init(2);
            init << std::log(std::max(m * c, 1e-3)), std::log(std::max((1 - m) * c, 1e-3));
            return detail::fit_numeric_mle(family, data, init, [](const Eigen::VectorXd& t) {
                double a = std::clamp(std::exp(t[0]), 1e-8, 1e8);
                double b = std::clamp(std::exp(t[1]), 1e-8, 1e8);
                return Distribution{Family::beta, {a, b}};
            });
        }
        case Family::student_t: {
            double m = mean_of(data), sd = std::sqrt(detail::var_of(data, m));
            Eigen::VectorXd init(3);
            init << m, std::log(sd), std::log(5.0);
            return detail::fit_numeric_mle(family, data, init, [](const Eigen::VectorXd& t) {
                // keep the optimizer's probes inside the family's domain
                double scale = std::clamp(std::exp(t[1]), 1e-12, 1e12);
                double dof = std::clamp(std::exp(t[2]), 0.1, 1e6);
                return Distribution{Family::student_t, {t[0], scale, dof}};
            });
        }
        case Family::gev: {
            // Gumbel moment estimates seed the optimizer.
            double m = mean_of(data), sd = std::sqrt(detail::var_of(data, m));
            double sigma0 = sd * std::sqrt(6.0) / M_PI;
            Eigen::VectorXd init(3);
            init << m - 0.5772156649 * sigma0, std::log(sigma0), 0.1;
            return detail::fit_numeric_mle(family, data, init, [](const Eigen::VectorXd& t) {
                double scale = std::clamp(std::exp(t[1]), 1e-12, 1e12);
                return Distribution{Family::gev, {t[0], scale, t[2]}};
            });
        }
        case Family::categorical: {
            long maxk = 0;
            for (double v : data) {
                long k = std::lround(v);
                if (k < 0 || std::abs(v - k) > 1e-9)
                    throw std::invalid_argument(
                        "categorical fit: data must be non-negative integer labels");
                maxk = std::max(maxk, k);
            }
            std::vector<double> p(static_cast<size_t>(maxk) + 1, 0.0);
            for (double v : data) p[static_cast<size_t>(std::lround(v))] += 1.0;
            for (auto& q : p) q /= static_cast<double>(n);
            return {family, p};
        }
        default:
            throw std::logic_error("unreachable");
    }
}

inline Distribution make_distribution(Family family, std::vector<double> params) {
    Distribution d{family, std::move(params)};
    detail::check_params(d);
    return d;
}

}  // namespace riskkit
