#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "riskkit/bayesnet.hpp"

namespace riskkit {

// Partially-blocked-lane emergency braking chain: triple-redundant detection
// triggers a 2oo3 voter, the host brakes after a reaction delay, and the
// residual collision speed is split by momentum between the participants.
struct Hs1Params {
    double v0;               // initial host velocity, m/s
    double a = 7.0;          // brake deceleration, m/s^2
    double t_react;          // reaction delay, s
    double e_margin;         // control-error safety margin, m
    double e_control;        // actual control error, m
    double m_host, m_target; // kg
    double intrusion_threshold = 1.0;  // m; shallower intrusions never collide
    double d_detection[3];   // per-channel detection distance, m
};

inline void validate(const Hs1Params& p) {
    if (!(p.a > 0) || p.t_react < 0 || p.e_margin < 0 || p.e_control < 0 ||
        !(p.m_host > 0) || !(p.m_target > 0))
        throw std::invalid_argument("invalid braking-scenario parameters");
}

// Distance needed to stop from v0 against a stationary target, with reaction
// delay and control-error margin.
inline double safe_distance(double v0, double a, double t_react, double e_margin) {
    return v0 * v0 / (2 * a) + v0 * t_react + e_margin;
}

// The safety check fires at the safe distance or when the object first
// becomes visible, whichever is closer.
inline double trigger_distance(double d_safe, double d_detection) {
    return std::min(d_safe, d_detection);
}

// Middle of the three per-channel trigger distances (2oo3 vote).
inline double voter_trigger(double d1, double d2, double d3) {
    return std::max(std::min(d1, d2), std::min(std::max(d1, d2), d3));
}

// Remaining distance when braking actually starts; may be negative.
inline double brake_start_distance(double d_2oo3, double v0, double t_react, double e_control) {
    return d_2oo3 - v0 * t_react - e_control;
}

// Uniform deceleration: collides undecelerated when braking starts late,
// stops short when the braking distance suffices.
inline double collision_speed(double v0, double a, double d_brake) {
    if (d_brake <= 0) return v0;
    double rad = v0 * v0 - 2 * a * d_brake;
    return rad < 0 ? 0.0 : std::sqrt(rad);
}

// Momentum-conserving plastic collision: each participant's speed change.
inline std::pair<double, double> delta_v_split(double v_crash, double m_host, double m_target) {
    double total = m_host + m_target;
    return {v_crash * m_target / total, v_crash * m_host / total};
}

inline double logistic_injury(double delta_v, double b0, double b1) {
    return 1.0 / (1.0 + std::exp(-(b0 + b1 * delta_v)));
}

// P(either participant injured) under conditional independence.
inline double combined_injury(double p_host, double p_target) {
    return p_host + p_target - p_host * p_target;
}

// Full chain: intrusion gate, per-channel trigger, 2oo3 vote, braking.
inline double hs1_reaction(const Hs1Params& p, double intrusion_depth) {
    validate(p);
    if (intrusion_depth < p.intrusion_threshold) return 0.0;
    double d_safe = safe_distance(p.v0, p.a, p.t_react, p.e_margin);
    double d1 = trigger_distance(d_safe, p.d_detection[0]);
    double d2 = trigger_distance(d_safe, p.d_detection[1]);
    double d3 = trigger_distance(d_safe, p.d_detection[2]);
    double d_2oo3 = voter_trigger(d1, d2, d3);
    double d_brake = brake_start_distance(d_2oo3, p.v0, p.t_react, p.e_control);
    return collision_speed(p.v0, p.a, d_brake);
}

// Registers the chain pieces as deterministic-node functions. Argument
// conventions are documented per name; safe to call more than once.
inline void register_hs1_functions() {
    register_function("safe_distance", [](std::span<const double> a) {
        // (v0, a, t_react, e_margin)
        if (a.size() != 4) throw std::invalid_argument("safe_distance expects 4 parents");
        return safe_distance(a[0], a[1], a[2], a[3]);
    });
    register_function("trigger_distance", [](std::span<const double> a) {
        if (a.size() != 2) throw std::invalid_argument("trigger_distance expects 2 parents");
        return trigger_distance(a[0], a[1]);
    });
    register_function("voter_trigger", [](std::span<const double> a) {
        if (a.size() != 3) throw std::invalid_argument("voter_trigger expects 3 parents");
        return voter_trigger(a[0], a[1], a[2]);
    });
    register_function("brake_start_distance", [](std::span<const double> a) {
        // (d_2oo3, v0, t_react, e_control)
        if (a.size() != 4) throw std::invalid_argument("brake_start_distance expects 4 parents");
        return brake_start_distance(a[0], a[1], a[2], a[3]);
    });
    register_function("collision_speed", [](std::span<const double> a) {
        // (v0, a, d_brake)
        if (a.size() != 3) throw std::invalid_argument("collision_speed expects 3 parents");
        return collision_speed(a[0], a[1], a[2]);
    });
    register_function("gated_collision_speed", [](std::span<const double> a) {
        // (v_crash, intrusion_depth, threshold): no collision geometry below
        // the intrusion threshold
        if (a.size() != 3)
            throw std::invalid_argument("gated_collision_speed expects 3 parents");
        return a[1] < a[2] ? 0.0 : a[0];
    });
    register_function("delta_v_host", [](std::span<const double> a) {
        // (v_crash, m_host, m_target)
        if (a.size() != 3) throw std::invalid_argument("delta_v_host expects 3 parents");
        return delta_v_split(a[0], a[1], a[2]).first;
    });
    register_function("delta_v_target", [](std::span<const double> a) {
        if (a.size() != 3) throw std::invalid_argument("delta_v_target expects 3 parents");
        return delta_v_split(a[0], a[1], a[2]).second;
    });
    register_function("combined_injury", [](std::span<const double> a) {
        if (a.size() != 2) throw std::invalid_argument("combined_injury expects 2 parents");
        return combined_injury(a[0], a[1]);
    });
}

}  // namespace riskkit
