#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace riskkit {

struct OptimResult {
    Eigen::VectorXd x;
    double f = std::numeric_limits<double>::quiet_NaN();
    double grad_norm = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    int iterations = 0;
};

// BFGS with central-difference gradients and backtracking line search.
// Objectives may return +inf outside their feasible region; the line
// search backs off until it finds a finite value.
inline OptimResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                                 Eigen::VectorXd x0, double grad_tol = 1e-8,
                                 int max_iter = 500) {
    const int n = static_cast<int>(x0.size());
    const double h = 1e-6;

    auto grad = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd xp = x, xm = x;
            double step = h * std::max(1.0, std::abs(x[i]));
            xp[i] += step;
            xm[i] -= step;
            double fp = f(xp), fm = f(xm);
            if (!std::isfinite(fp) || !std::isfinite(fm)) {
                // one-sided fallback at the feasibility boundary
                double fx = f(x);
                if (std::isfinite(fp))
                    g[i] = (fp - fx) / step;
                else if (std::isfinite(fm))
                    g[i] = (fx - fm) / step;
                else
                    g[i] = 0.0;
            } else {
                g[i] = (fp - fm) / (2 * step);
            }
        }
        return g;
    };

    OptimResult res;
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd x = std::move(x0);
    double fx = f(x);
    Eigen::VectorXd g = grad(x);

    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it;
        if (g.norm() < grad_tol) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd d = -H * g;
        if (d.dot(g) >= 0) {  // not a descent direction; reset
            H.setIdentity();
            d = -g;
        }
        double t = 1.0;
        double fnew = std::numeric_limits<double>::infinity();
        Eigen::VectorXd xnew;
        for (int ls = 0; ls < 60; ++ls) {
            xnew = x + t * d;
            fnew = f(xnew);
            if (std::isfinite(fnew) && fnew <= fx + 1e-4 * t * g.dot(d)) break;
            t *= 0.5;
        }
        if (!std::isfinite(fnew) || fnew >= fx - 1e-16 * std::abs(fx) - 1e-300) {
            res.converged = g.norm() < 1e-5;  // stalled near optimum
            break;
        }
        Eigen::VectorXd gnew = grad(xnew);
        Eigen::VectorXd s = xnew - x;
        Eigen::VectorXd y = gnew - g;
        double sy = s.dot(y);
        if (sy > 1e-12) {
            Eigen::VectorXd Hy = H * y;
            double yHy = y.dot(Hy);
            H += ((sy + yHy) / (sy * sy)) * (s * s.transpose())
                 - (Hy * s.transpose() + s * Hy.transpose()) / sy;
        }
        x = xnew;
        fx = fnew;
        g = gnew;
    }
    res.x = x;
    res.f = fx;
    res.grad_norm = g.norm();
    return res;
}

}  // namespace riskkit
