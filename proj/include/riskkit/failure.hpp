#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>

#include "riskkit/distribution.hpp"

namespace riskkit {

// Observed failure evidence: n_f failures over n demands (demand mode) or
// over T exposure hours (rate mode).
struct FailureEvidence {
    std::uint64_t n_f = 0;
    std::uint64_t n = 0;       // demand mode
    double hours = 0.0;        // rate mode
};

enum class FailureMode { demand, rate };

struct FailurePosterior {
    FailureMode mode;
    Distribution posterior;  // beta(a,b) for demand; gamma(a, scale 1/T) for rate
    double point;            // posterior mean: probability or rate per hour
    double mle;              // n_f/n or n_f/T (NaN when n = 0)
};

// Posterior under a uniform prior: beta(n_f+1, n-n_f+1), mean (n_f+1)/(n+2).
inline FailurePosterior estimate_failure_probability(const FailureEvidence& ev) {
    if (ev.n_f > ev.n)
        throw std::invalid_argument("failure count exceeds demand count");
    double a = static_cast<double>(ev.n_f) + 1.0;
    double b = static_cast<double>(ev.n - ev.n_f) + 1.0;
    double point = a / (static_cast<double>(ev.n) + 2.0);
    double mle = ev.n > 0 ? static_cast<double>(ev.n_f) / static_cast<double>(ev.n)
                          : std::numeric_limits<double>::quiet_NaN();
    return {FailureMode::demand, make_distribution(Family::beta, {a, b}), point, mle};
}

// Posterior under an improper uniform prior: gamma(n_f+1) scaled by 1/T,
// mean (n_f+1)/T per hour.
inline FailurePosterior estimate_failure_rate(const FailureEvidence& ev) {
    if (!(ev.hours > 0)) throw std::invalid_argument("exposure hours must be positive");
    double a = static_cast<double>(ev.n_f) + 1.0;
    double point = a / ev.hours;
    double mle = static_cast<double>(ev.n_f) / ev.hours;
    return {FailureMode::rate, make_distribution(Family::gamma, {a, 1.0 / ev.hours}), point,
            mle};
}

}  // namespace riskkit
