#include "audit/regress.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "audit/error.hpp"
#include "audit/stats.hpp"

namespace audit::causal {

namespace {

Eigen::MatrixXd to_matrix(const DesignMatrix& x) {
    const std::size_t n = x.n(), k = x.k();
    if (n == 0 || k == 0) throw AuditError("empty_design", "design matrix is empty");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < n; ++i) {
        if (x.rows[i].size() != k)
            throw AuditError("ragged_design", "row width mismatch");
        for (std::size_t j = 0; j < k; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x.rows[i][j];
    }
    return m;
}

void check_rank(const Eigen::MatrixXd& m, const DesignMatrix& x) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
    qr.setThreshold(1e-10);
    if (qr.rank() < m.cols()) {
        std::string cols;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < m.cols(); ++j) {
            if (!cols.empty()) cols += ", ";
            cols += x.column_names[static_cast<std::size_t>(perm[j])];
        }
        throw AuditError("rank_deficient", "collinear columns: " + cols);
    }
}

// Per-cluster score outer products with the CR1 small-sample factor.
Eigen::MatrixXd clustered_meat(const Eigen::MatrixXd& m,
                               const Eigen::VectorXd& scores,
                               const std::vector<std::string>& cluster_id,
                               double* correction, std::size_t k, bool ols_factor) {
    const std::size_t n = static_cast<std::size_t>(m.rows());
    std::map<std::string, Eigen::VectorXd> sums;
    for (std::size_t i = 0; i < n; ++i) {
        std::string key = cluster_id.empty() ? std::to_string(i) : cluster_id[i];
        auto [it, inserted] = sums.try_emplace(key, Eigen::VectorXd::Zero(m.cols()));
        it->second += m.row(static_cast<Eigen::Index>(i)).transpose() *
                      scores(static_cast<Eigen::Index>(i));
    }
    const double g = static_cast<double>(sums.size());
    if (g < 2.0)
        throw AuditError("too_few_clusters", "need at least two clusters");
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(m.cols(), m.cols());
    for (const auto& [key, v] : sums) meat += v * v.transpose();
    *correction = ols_factor
                      ? g / (g - 1.0) * (static_cast<double>(n) - 1.0) /
                            (static_cast<double>(n) - static_cast<double>(k))
                      : g / (g - 1.0);
    return meat;
}

void fill_pvalues(RegressionResult& r) {
    r.p_values.resize(r.coefficients.size());
    for (std::size_t j = 0; j < r.coefficients.size(); ++j) {
        if (r.se[j] <= 0.0) {
            r.p_values[j] = r.coefficients[j] == 0.0 ? 1.0 : 0.0;
            continue;
        }
        double z = r.coefficients[j] / r.se[j];
        r.p_values[j] = std::min(1.0, 2.0 * (1.0 - stats::normal_cdf(std::fabs(z))));
    }
}

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

enum class Link { logit, probit };

RegressionResult fit_glm(const DesignMatrix& x, const std::vector<double>& y,
                         Link link) {
    const std::size_t n = x.n(), k = x.k();
    if (y.size() != n) throw AuditError("length_mismatch", "y length != rows");
    if (n <= k) throw AuditError("too_few_rows", "need n > number of columns");
    for (double v : y)
        if (v < 0.0 || v > 1.0)
            throw AuditError("bad_response", "responses must lie in [0, 1]");

    Eigen::MatrixXd m = to_matrix(x);
    check_rank(m, x);
    Eigen::VectorXd yv(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) yv(static_cast<Eigen::Index>(i)) = y[i];

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    Eigen::VectorXd mu(static_cast<Eigen::Index>(n)), w(static_cast<Eigen::Index>(n)),
        score(static_cast<Eigen::Index>(n));

    RegressionResult result;
    result.terms = x.column_names;
    result.n = static_cast<int>(n);
    result.convergence = false;

    constexpr double kMuFloor = 1e-10;
    constexpr double kSeparationBound = 30.0;
    Eigen::MatrixXd xtwx;

    for (int iter = 1; iter <= 100; ++iter) {
        Eigen::VectorXd eta = m * beta;
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            if (link == Link::logit) {
                double p = 1.0 / (1.0 + std::exp(-eta(i)));
                p = std::clamp(p, kMuFloor, 1.0 - kMuFloor);
                mu(i) = p;
                w(i) = p * (1.0 - p);
                score(i) = yv(i) - p;
            } else {
                double p = stats::normal_cdf(eta(i));
                p = std::clamp(p, kMuFloor, 1.0 - kMuFloor);
                double d = normal_pdf(eta(i));
                mu(i) = p;
                w(i) = d * d / (p * (1.0 - p));
                score(i) = (yv(i) - p) * d / (p * (1.0 - p));
            }
        }
        xtwx = m.transpose() * w.asDiagonal() * m;
        Eigen::VectorXd grad = m.transpose() * score;
        Eigen::VectorXd delta = xtwx.ldlt().solve(grad);
        beta += delta;
        result.iterations = iter;
        if (beta.cwiseAbs().maxCoeff() > kSeparationBound)
            throw AuditError("separation", "diverging coefficients (perfect separation)");
        if (delta.cwiseAbs().maxCoeff() < 1e-8) {
            result.convergence = true;
            break;
        }
    }

    result.coefficients.assign(beta.data(), beta.data() + beta.size());

    Eigen::MatrixXd bread = xtwx.inverse();
    result.se.resize(k);
    if (!x.cluster_id.empty()) {
        double correction = 1.0;
        Eigen::MatrixXd meat =
            clustered_meat(m, score, x.cluster_id, &correction, k, false);
        Eigen::MatrixXd cov = correction * bread * meat * bread;
        for (std::size_t j = 0; j < k; ++j)
            result.se[j] = std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(j),
                                                       static_cast<Eigen::Index>(j))));
    } else {
        for (std::size_t j = 0; j < k; ++j)
            result.se[j] = std::sqrt(std::max(0.0, bread(static_cast<Eigen::Index>(j),
                                                         static_cast<Eigen::Index>(j))));
    }
    fill_pvalues(result);
    return result;
}

}  // namespace

RegressionResult ols_clustered(const DesignMatrix& x, const std::vector<double>& y) {
    const std::size_t n = x.n(), k = x.k();
    if (y.size() != n) throw AuditError("length_mismatch", "y length != rows");
    if (n <= k) throw AuditError("too_few_rows", "need n > number of columns");

    Eigen::MatrixXd m = to_matrix(x);
    check_rank(m, x);
    Eigen::VectorXd yv(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) yv(static_cast<Eigen::Index>(i)) = y[i];

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::VectorXd beta = qr.solve(yv);
    Eigen::VectorXd resid = yv - m * beta;

    RegressionResult result;
    result.terms = x.column_names;
    result.n = static_cast<int>(n);
    result.coefficients.assign(beta.data(), beta.data() + beta.size());

    const double tss = (yv.array() - yv.mean()).square().sum();
    const double rss = resid.squaredNorm();
    result.r2 = tss > 0.0 ? 1.0 - rss / tss : 1.0;

    Eigen::MatrixXd bread = (m.transpose() * m).inverse();
    double correction = 1.0;
    Eigen::MatrixXd meat = clustered_meat(m, resid, x.cluster_id, &correction, k, true);
    Eigen::MatrixXd cov = correction * bread * meat * bread;
    result.se.resize(k);
    for (std::size_t j = 0; j < k; ++j)
        result.se[j] = std::sqrt(std::max(0.0, cov(static_cast<Eigen::Index>(j),
                                                   static_cast<Eigen::Index>(j))));
    fill_pvalues(result);
    return result;
}

RegressionResult fit_logistic(const DesignMatrix& x, const std::vector<double>& y) {
    return fit_glm(x, y, Link::logit);
}

RegressionResult fit_probit(const DesignMatrix& x, const std::vector<double>& y) {
    return fit_glm(x, y, Link::probit);
}

std::vector<double> predict_logistic(const DesignMatrix& x,
                                     const std::vector<double>& beta) {
    std::vector<double> out(x.n());
    for (std::size_t i = 0; i < x.n(); ++i) {
        double eta = 0.0;
        for (std::size_t j = 0; j < x.k(); ++j) eta += x.rows[i][j] * beta[j];
        out[i] = 1.0 / (1.0 + std::exp(-eta));
    }
    return out;
}

}  // namespace audit::causal
