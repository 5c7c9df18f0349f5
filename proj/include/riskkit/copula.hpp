#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "riskkit/distribution.hpp"
#include "riskkit/rng.hpp"

namespace riskkit {

// Gaussian copula: correlation matrix on normal scores, unit diagonal, PSD.
struct CopulaModel {
    Eigen::MatrixXd sigma;

    long dimension() const { return sigma.rows(); }
};

struct JointModel {
    std::vector<Distribution> marginals;
    CopulaModel copula;
    std::string category;  // optional label for category-switched joints
};

namespace detail {

// Clip negative eigenvalues, restore the unit diagonal. No-op on PSD input.
inline Eigen::MatrixXd project_to_correlation(Eigen::MatrixXd s) {
    s = 0.5 * (s + s.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
        s = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
        Eigen::VectorXd d = s.diagonal().cwiseSqrt();
        for (long i = 0; i < s.rows(); ++i)
            for (long j = 0; j < s.cols(); ++j) s(i, j) /= d[i] * d[j];
    }
    s.diagonal().setOnes();
    return s;
}

}  // namespace detail

// Normal-scores correlation of the uniform inputs, projected to a valid
// correlation matrix. Entries at exactly 0 or 1 are clamped inward.
inline CopulaModel fit_gaussian_copula(const Eigen::MatrixXd& uniform_samples) {
    const long n = uniform_samples.rows(), d = uniform_samples.cols();
    if (n < d + 1)
        throw std::invalid_argument("fit_gaussian_copula: need at least d+1 samples");
    boost::math::normal_distribution<> std_normal;
    Eigen::MatrixXd z(n, d);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < d; ++j) {
            double u = uniform_samples(i, j);
            if (!(u > 0.0 && u < 1.0)) u = std::clamp(u, 1e-12, 1.0 - 1e-12);
            z(i, j) = boost::math::quantile(std_normal, u);
        }
    Eigen::RowVectorXd mean = z.colwise().mean();
    z.rowwise() -= mean;
    Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(n - 1);
    Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j) {
            double denom = sd[i] * sd[j];
            if (!(denom > 0))
                throw std::invalid_argument("fit_gaussian_copula: degenerate column");
            cov(i, j) /= denom;
        }
    return {detail::project_to_correlation(std::move(cov))};
}

// Samples uniform margins with the model's normal-score correlation.
inline Eigen::MatrixXd sample_copula(const CopulaModel& model, long n, RngStream& rng) {
    const long d = model.dimension();
    Eigen::LLT<Eigen::MatrixXd> llt(model.sigma +
                                    1e-12 * Eigen::MatrixXd::Identity(d, d));
    Eigen::MatrixXd L = llt.matrixL();
    boost::math::normal_distribution<> std_normal;
    Eigen::MatrixXd out(n, d);
    Eigen::VectorXd z(d);
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < d; ++j)
            z[j] = boost::math::quantile(std_normal, rng.uniform01());
        Eigen::VectorXd x = L * z;
        for (long j = 0; j < d; ++j) out(i, j) = boost::math::cdf(std_normal, x[j]);
    }
    return out;
}

// Copula sample pushed through the marginal quantile functions.
inline Eigen::MatrixXd sample_joint(const JointModel& joint, long n, RngStream& rng) {
    if (static_cast<long>(joint.marginals.size()) != joint.copula.dimension())
        throw std::invalid_argument("sample_joint: marginal count != copula dimension");
    Eigen::MatrixXd u = sample_copula(joint.copula, n, rng);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < u.cols(); ++j)
            u(i, j) = quantile(joint.marginals[static_cast<size_t>(j)], u(i, j));
    return u;
}

struct ResidualCopula {
    std::vector<Distribution> noise_marginals;  // normal fit per column
    CopulaModel copula;
};

// Normal marginals per residual column plus a Gaussian copula over their
// PIT scores; couples the noise of regression models fit on shared runs.
inline ResidualCopula fit_residual_copula(const Eigen::MatrixXd& residuals) {
    const long n = residuals.rows(), m = residuals.cols();
    if (m < 2)
        throw std::invalid_argument("fit_residual_copula: need residuals from >= 2 models");
    if (n < m + 1) throw std::invalid_argument("fit_residual_copula: too few rows");
    ResidualCopula rc;
    Eigen::MatrixXd u(n, m);
    for (long j = 0; j < m; ++j) {
        std::vector<double> col(residuals.col(j).data(), residuals.col(j).data() + n);
        Distribution d = fit_marginal(col, Family::normal);
        for (long i = 0; i < n; ++i) u(i, j) = cdf(d, residuals(i, j));
        rc.noise_marginals.push_back(std::move(d));
    }
    rc.copula = fit_gaussian_copula(u);
    return rc;
}

}  // namespace riskkit
