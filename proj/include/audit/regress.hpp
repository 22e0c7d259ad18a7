#ifndef AUDIT_REGRESS_HPP
#define AUDIT_REGRESS_HPP

#include <string>
#include <vector>

namespace audit::causal {

struct DesignMatrix {
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> rows;       // row-major, includes intercept if desired
    std::vector<std::string> cluster_id;         // empty -> no clustering

    std::size_t n() const { return rows.size(); }
    std::size_t k() const { return column_names.size(); }
};

struct RegressionResult {
    std::vector<std::string> terms;
    std::vector<double> coefficients;
    std::vector<double> se;            // clustered when cluster_id present, else robust/model
    std::vector<double> p_values;
    int n = 0;
    double r2 = 0.0;                   // linear models only
    bool convergence = true;
    int iterations = 0;
};

// OLS via QR with CR1 cluster-robust covariance. With no cluster ids each
// observation is its own cluster, which reduces CR1 to HC1.
RegressionResult ols_clustered(const DesignMatrix& x, const std::vector<double>& y);

// Logistic fit via IRLS; y may be fractional in [0,1] (quasi-likelihood).
RegressionResult fit_logistic(const DesignMatrix& x, const std::vector<double>& y);

// Probit fit; same contracts as fit_logistic. Rates are clamped to [0,1]
// upstream, the fit itself is a fractional-response quasi-likelihood.
RegressionResult fit_probit(const DesignMatrix& x, const std::vector<double>& y);

std::vector<double> predict_logistic(const DesignMatrix& x,
                                     const std::vector<double>& beta);

}  // namespace audit::causal

#endif
