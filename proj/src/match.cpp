#include "audit/match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "audit/error.hpp"

namespace audit::causal {

namespace {

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (static_cast<double>(v.size()) - 1.0);
}

std::map<std::string, double> balance(
    const std::vector<Unit>& units, const std::vector<std::string>& covariate_names,
    const std::set<std::string>& keep) {
    std::map<std::string, double> out;
    for (std::size_t c = 0; c < covariate_names.size(); ++c) {
        std::vector<double> values;
        std::vector<bool> treated;
        for (const auto& u : units) {
            if (!keep.empty() && !keep.count(u.id)) continue;
            values.push_back(u.covariates[c]);
            treated.push_back(u.treated);
        }
        out[covariate_names[c]] = smd(values, treated).value;
    }
    return out;
}

}  // namespace

SmdValue smd(const std::vector<double>& values, const std::vector<bool>& treated) {
    std::vector<double> t, c;
    for (std::size_t i = 0; i < values.size(); ++i)
        (treated[i] ? t : c).push_back(values[i]);
    if (t.size() < 2 || c.size() < 2)
        throw AuditError("too_few_units", "each group needs n >= 2 for SMD");
    double pooled = (sample_var(t) + sample_var(c)) / 2.0;
    double diff = mean(t) - mean(c);
    SmdValue out;
    if (pooled <= 0.0) {
        if (diff == 0.0) {
            out.value = 0.0;
        } else {
            out.value = diff > 0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
            out.degenerate = true;
        }
        return out;
    }
    out.value = diff / std::sqrt(pooled);
    return out;
}

MatchResult propensity_match(const std::vector<Unit>& units,
                             const std::vector<std::string>& covariate_names,
                             const MatchConfig& cfg) {
    if (units.empty()) throw AuditError("empty_design", "no units");

    // propensity = P(treated | covariates) by logistic regression
    DesignMatrix x;
    x.column_names.push_back("intercept");
    for (const auto& name : covariate_names) x.column_names.push_back(name);
    std::vector<double> y;
    for (const auto& u : units) {
        std::vector<double> row{1.0};
        row.insert(row.end(), u.covariates.begin(), u.covariates.end());
        x.rows.push_back(std::move(row));
        y.push_back(u.treated ? 1.0 : 0.0);
    }
    RegressionResult fit = fit_logistic(x, y);
    std::vector<double> scores = predict_logistic(x, fit.coefficients);

    MatchResult result;
    result.caliper = cfg.caliper;
    for (std::size_t i = 0; i < units.size(); ++i)
        result.propensity[units[i].id] = scores[i];

    double caliper = cfg.caliper;
    if (cfg.caliper_on_logit_sd) {
        std::vector<double> logits(scores.size());
        std::transform(scores.begin(), scores.end(), logits.begin(), [](double p) {
            return std::log(p / (1.0 - p));
        });
        caliper = cfg.caliper * std::sqrt(sample_var(logits));
    }

    std::vector<std::size_t> treated_idx, control_idx;
    for (std::size_t i = 0; i < units.size(); ++i)
        (units[i].treated ? treated_idx : control_idx).push_back(i);
    std::stable_sort(treated_idx.begin(), treated_idx.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<bool> control_used(units.size(), false);
    std::set<std::string> matched_ids;
    for (std::size_t t : treated_idx) {
        double best_dist = caliper;
        std::ptrdiff_t best = -1;
        for (std::size_t c : control_idx) {
            if (control_used[c]) continue;
            double dist = std::fabs(scores[t] - scores[c]);
            if (dist <= best_dist && (best < 0 || dist < best_dist)) {
                best_dist = dist;
                best = static_cast<std::ptrdiff_t>(c);
            }
        }
        if (best >= 0) {
            control_used[static_cast<std::size_t>(best)] = true;
            result.pairs.emplace_back(units[t].id,
                                      units[static_cast<std::size_t>(best)].id);
            matched_ids.insert(units[t].id);
            matched_ids.insert(units[static_cast<std::size_t>(best)].id);
        } else {
            result.unmatched.push_back(units[t].id);
        }
    }

    result.smd_before = balance(units, covariate_names, {});
    if (result.pairs.size() >= 2)
        result.smd_after = balance(units, covariate_names, matched_ids);
    return result;
}

CommonReferentResult common_referent_match(
    const std::vector<Unit>& control, const std::vector<Unit>& group_a,
    const std::vector<Unit>& group_b, const std::vector<std::string>& covariate_names,
    const MatchConfig& cfg) {
    auto run = [&](const std::vector<Unit>& treated_group) {
        std::vector<Unit> pool;
        for (Unit u : control) {
            u.treated = false;
            pool.push_back(std::move(u));
        }
        for (Unit u : treated_group) {
            u.treated = true;
            pool.push_back(std::move(u));
        }
        return propensity_match(pool, covariate_names, cfg);
    };
    return {run(group_a), run(group_b)};
}

}  // namespace audit::causal
