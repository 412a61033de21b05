#include "twostep/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "twostep/errors.hpp"

namespace twostep {

namespace {

// Coarse log-spaced scan, then Brent inside the bracket around the best
// scanned point.
template <typename F>
double minimize_scalar(const F& f, double lo, double hi, int scan_points = 200) {
    const double log_lo = std::log(lo);
    const double log_hi = std::log(hi);
    int best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    std::vector<double> xs(static_cast<std::size_t>(scan_points));
    for (int i = 0; i < scan_points; ++i) {
        xs[static_cast<std::size_t>(i)] =
            std::exp(log_lo + (log_hi - log_lo) * i / (scan_points - 1));
        const double v = f(xs[static_cast<std::size_t>(i)]);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    const double a = xs[static_cast<std::size_t>(std::max(best - 1, 0))];
    const double b = xs[static_cast<std::size_t>(std::min(best + 1, scan_points - 1))];
    std::uintmax_t max_iter = 500;
    const auto result = boost::math::tools::brent_find_minima(
        f, a, b, std::numeric_limits<double>::digits / 2 + 4, max_iter);
    return result.second <= best_value ? result.first : xs[static_cast<std::size_t>(best)];
}

double rms(const std::vector<double>& v) {
    if (v.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s / static_cast<double>(v.size()));
}

void validate_grid(const CalibrationGrid& grid) {
    if (grid.sigma.empty()) {
        throw ValidationError("sigma_grid", "must not be empty");
    }
    if (grid.m0.empty()) {
        throw ValidationError("m0_grid", "must not be empty");
    }
    for (double s : grid.sigma) {
        if (!(s > 0.0 && s < 1.0)) {
            throw ValidationError("sigma_grid", "values must lie in (0, 1)");
        }
    }
    for (double m : grid.m0) {
        if (!(m >= 0.0 && m <= 1.0)) {
            throw ValidationError("m0_grid", "values must lie in [0, 1]");
        }
    }
}

struct OraclePoint {
    double sigma;
    double m0;
    double steady;
};

// Precomputed log-kernel terms of one observation: the preference of message
// j is exp((alpha - 1) log d_j^2 + (beta - 1) log(1 - d_j^2)).
struct PreparedObservation {
    std::vector<double> log_d2;
    std::vector<double> log_one_minus_d2;
    std::vector<double> observed;
};

double squared_error(const PreparedObservation& obs, double alpha, double beta,
                     std::vector<double>& scratch) {
    const std::size_t n = obs.observed.size();
    scratch.resize(n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double log_p = 0.0;
        if (alpha != 1.0) {
            log_p += (alpha - 1.0) * obs.log_d2[j];
        }
        if (beta != 1.0) {
            log_p += (beta - 1.0) * obs.log_one_minus_d2[j];
        }
        scratch[j] = std::exp(log_p);
        total += scratch[j];
    }
    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double gamma = total > 0.0 ? scratch[j] / total : 1.0 / static_cast<double>(n);
        const double diff = gamma - obs.observed[j];
        err += diff * diff;
    }
    return err;
}

double prepared_objective(const std::vector<PreparedObservation>& prepared, double alpha,
                          double beta, std::vector<double>& scratch) {
    double sum = 0.0;
    for (const auto& obs : prepared) {
        sum += squared_error(obs, alpha, beta, scratch);
    }
    return sum;
}

bool has_exact_match(const PreferenceObservation& obs) {
    for (Eigen::Index j = 0; j < obs.messages.size(); ++j) {
        if (obs.messages[j] == obs.m_prev) {
            return true;
        }
    }
    return false;
}

bool is_informative(const PreferenceObservation& obs) {
    if (obs.messages.size() < 2) {
        return false;
    }
    const double d0 = std::abs(obs.m_prev - obs.messages[0]);
    for (Eigen::Index j = 1; j < obs.messages.size(); ++j) {
        if (std::abs(std::abs(obs.m_prev - obs.messages[j]) - d0) > 1e-12) {
            return true;
        }
    }
    return false;
}

}  // namespace

ExponentFit fit_exponent(const MessageDistribution& dist, double alpha, double beta,
                         const CalibrationGrid& grid) {
    validate_grid(grid);
    validate_preference(alpha, beta);
    const double mu = dist.mean();
    std::vector<OraclePoint> points;
    points.reserve(grid.sigma.size() * grid.m0.size());
    for (double s : grid.sigma) {
        for (double m0 : grid.m0) {
            const auto fp = leader_ss_fixed_point(s, m0, dist, alpha, beta, grid.solver);
            points.push_back({s, m0, fp.value});
        }
    }
    auto residual = [&](const OraclePoint& pt, double w) {
        const double z = std::pow(pt.sigma, w);
        return pt.steady - (z * pt.m0 + (1.0 - z) * mu);
    };
    auto objective = [&](double w) {
        double sum = 0.0;
        for (const auto& pt : points) {
            const double r = residual(pt, w);
            sum += r * r;
        }
        return sum;
    };
    ExponentFit fit;
    fit.w = minimize_scalar(objective, 1e-3, 10.0);
    fit.rms_residual = std::sqrt(objective(fit.w) / static_cast<double>(points.size()));
    return fit;
}

ExponentFit solve_w_beta(const MessageDistribution& dist, double beta, const CalibrationGrid& grid) {
    if (!(beta > 1.0)) {
        throw ValidationError("beta", "w_beta is defined for beta > 1");
    }
    return fit_exponent(dist, 1.0, beta, grid);
}

LawFit fit_kappa_law(const std::vector<double>& betas, const std::vector<double>& w) {
    if (betas.size() != w.size() || betas.empty()) {
        throw DimensionMismatch("fit_kappa_law: grid and samples must have equal nonzero length");
    }
    auto law = [](double kappa, double beta) { return 1.0 / (kappa * (beta - 1.0) + 1.0); };
    auto objective = [&](double kappa) {
        double sum = 0.0;
        for (std::size_t i = 0; i < betas.size(); ++i) {
            const double r = w[i] - law(kappa, betas[i]);
            sum += r * r;
        }
        return sum;
    };
    LawFit fit;
    fit.constant = minimize_scalar(objective, 1e-6, 50.0);
    fit.grid = betas;
    fit.w = w;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        fit.residuals.push_back(w[i] - law(fit.constant, betas[i]));
    }
    fit.rms_residual = rms(fit.residuals);
    return fit;
}

LawFit fit_lambda_law(const std::vector<double>& alphas, const std::vector<double>& w) {
    if (alphas.size() != w.size() || alphas.empty()) {
        throw DimensionMismatch("fit_lambda_law: grid and samples must have equal nonzero length");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        const double l = std::log(alphas[i]);
        num += l * (w[i] - 1.0);
        den += l * l;
    }
    if (!(den > 0.0)) {
        throw DegenerateData("fit_lambda_law: needs at least one alpha < 1");
    }
    LawFit fit;
    fit.constant = num / den;
    fit.grid = alphas;
    fit.w = w;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        fit.residuals.push_back(w[i] - (fit.constant * std::log(alphas[i]) + 1.0));
    }
    fit.rms_residual = rms(fit.residuals);
    return fit;
}

LawFit fit_kappa(const MessageDistribution& dist, const std::vector<double>& beta_grid,
                 const CalibrationGrid& grid) {
    if (beta_grid.size() < 5) {
        throw ValidationError("beta_grid", "needs at least five points");
    }
    for (double b : beta_grid) {
        if (!(b > 1.0 && b <= 5.0)) {
            throw ValidationError("beta_grid", "values must lie in (1, 5]");
        }
    }
    std::vector<double> w;
    w.reserve(beta_grid.size());
    for (double b : beta_grid) {
        w.push_back(solve_w_beta(dist, b, grid).w);
    }
    return fit_kappa_law(beta_grid, w);
}

LawFit fit_lambda(const MessageDistribution& dist, const std::vector<double>& alpha_grid,
                  double beta_ref, const CalibrationGrid& grid) {
    if (alpha_grid.size() < 5) {
        throw ValidationError("alpha_grid", "needs at least five points");
    }
    for (double a : alpha_grid) {
        if (!(a > 0.5 && a <= 1.0)) {
            throw ValidationError("alpha_grid", "values must lie in (0.5, 1]");
        }
    }
    if (!(beta_ref > 1.0)) {
        throw ValidationError("beta_ref", "must exceed 1");
    }
    const double reference = fit_exponent(dist, 1.0, beta_ref, grid).w;
    std::vector<double> w;
    w.reserve(alpha_grid.size());
    for (double a : alpha_grid) {
        w.push_back(a == 1.0 ? 1.0 : fit_exponent(dist, a, beta_ref, grid).w / reference);
    }
    return fit_lambda_law(alpha_grid, w);
}

FitResult fit_constants(const MessageDistribution& dist, const ConstantsFitOptions& options) {
    FitResult result;
    result.kappa_law = fit_kappa(dist, options.beta_grid, options.grid);
    result.lambda_law = fit_lambda(dist, options.alpha_grid, options.beta_ref, options.grid);
    result.kappa = result.kappa_law.constant;
    result.lambda = result.lambda_law.constant;
    result.per_point_residuals = result.kappa_law.residuals;
    result.per_point_residuals.insert(result.per_point_residuals.end(),
                                      result.lambda_law.residuals.begin(),
                                      result.lambda_law.residuals.end());
    result.rms_residual = rms(result.per_point_residuals);
    return result;
}

void validate_observation(const PreferenceObservation& obs) {
    if (obs.messages.size() == 0) {
        throw ValidationError("messages", "observation has no messages");
    }
    if (obs.messages.size() != obs.observed_weights.size()) {
        throw DimensionMismatch("observation has " + std::to_string(obs.messages.size()) +
                                " messages but " + std::to_string(obs.observed_weights.size()) +
                                " weights");
    }
    if (!(obs.m_prev >= 0.0 && obs.m_prev <= 1.0)) {
        throw ValidationError("m_prev", "must lie in [0, 1]");
    }
    double sum = 0.0;
    for (Eigen::Index j = 0; j < obs.messages.size(); ++j) {
        if (!(obs.messages[j] >= 0.0 && obs.messages[j] <= 1.0)) {
            throw ValidationError("messages", "must lie in [0, 1]");
        }
        if (!(obs.observed_weights[j] >= 0.0)) {
            throw ValidationError("weights", "must be nonnegative");
        }
        sum += obs.observed_weights[j];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("weights", "must sum to 1 (got " + std::to_string(sum) + ")");
    }
}

double preference_objective(const std::vector<PreferenceObservation>& observations, double alpha,
                            double beta) {
    validate_preference(alpha, beta);
    double sum = 0.0;
    for (const auto& obs : observations) {
        const Vector gamma = selective_coefficients(obs.m_prev, obs.messages, alpha, beta);
        sum += (gamma - obs.observed_weights).squaredNorm();
    }
    return sum;
}

PreferenceEstimate estimate_preference_coeffs(const std::vector<PreferenceObservation>& observations,
                                              const PreferenceSearchOptions& options) {
    if (observations.size() < 2) {
        throw ValidationError("observations", "need at least two observations");
    }
    if (!(options.step > 0.0 && options.step <= 0.25)) {
        throw ValidationError("step", "grid step must lie in (0, 0.25]");
    }
    if (!(options.beta_max > 1.0)) {
        throw ValidationError("beta_max", "must exceed 1");
    }

    PreferenceEstimate est;
    std::vector<PreparedObservation> prepared;
    bool informative = false;
    for (const auto& obs : observations) {
        validate_observation(obs);
        if (has_exact_match(obs)) {
            ++est.excluded;
            continue;
        }
        informative = informative || is_informative(obs);
        PreparedObservation p;
        for (Eigen::Index j = 0; j < obs.messages.size(); ++j) {
            const double d = std::abs(obs.m_prev - obs.messages[j]);
            p.log_d2.push_back(std::log(d * d));
            p.log_one_minus_d2.push_back(std::log(std::max(0.0, (1.0 - d) * (1.0 + d))));
            p.observed.push_back(obs.observed_weights[j]);
        }
        prepared.push_back(std::move(p));
    }
    est.used = prepared.size();
    if (!informative) {
        throw DegenerateData(
            "no observation discriminates between preference settings (messages equidistant "
            "from the opinion or exact matches only)");
    }

    std::vector<double> scratch;
    auto objective = [&](double a, double b) { return prepared_objective(prepared, a, b, scratch); };

    const int alpha_steps = static_cast<int>(std::floor(0.5 / options.step + 1e-9));
    const int beta_steps = static_cast<int>(std::floor((options.beta_max - 1.0) / options.step + 1e-9));
    double best_a = 1.0;
    double best_b = 1.0;
    double best = objective(1.0, 1.0);
    double worst = best;
    for (int i = 1; i <= alpha_steps; ++i) {
        double a = 0.5 + i * options.step;
        if (std::abs(a - 1.0) < 1e-9) {
            a = 1.0;
        }
        for (int k = 1; k <= beta_steps; ++k) {
            const double b = 1.0 + k * options.step;
            const double v = objective(a, b);
            worst = std::max(worst, v);
            if (v < best) {
                best = v;
                best_a = a;
                best_b = b;
            }
        }
    }
    if (worst - best <= 1e-15 * std::max(1.0, worst)) {
        throw DegenerateData("preference objective is flat over the admissible region");
    }
    est.grid_objective = best;

    if (!is_degenerate_preference(best_a, best_b)) {
        // Per-axis parabolic steps with a shrinking stencil. A candidate is kept
        // only when it lowers the objective.
        const double a_lo = 0.5 + 1e-9;
        const double b_lo = 1.0 + 1e-9;
        double h = options.step;
        for (std::size_t round = 0; round < options.refinement_rounds; ++round) {
            for (int axis = 0; axis < 2; ++axis) {
                const double lo = axis == 0 ? a_lo : b_lo;
                const double hi = axis == 0 ? 1.0 : options.beta_max;
                const double x = axis == 0 ? best_a : best_b;
                double x0 = x - h;
                if (x0 < lo) {
                    x0 = lo;
                }
                if (x0 + 2.0 * h > hi) {
                    x0 = hi - 2.0 * h;
                }
                if (x0 < lo) {
                    continue;
                }
                auto eval = [&](double v) {
                    return axis == 0 ? objective(v, best_b) : objective(best_a, v);
                };
                const double f0 = eval(x0);
                const double f1 = eval(x0 + h);
                const double f2 = eval(x0 + 2.0 * h);
                const double curvature = f0 - 2.0 * f1 + f2;
                if (!(curvature > 0.0)) {
                    continue;
                }
                double vertex = x0 + h + 0.5 * h * (f0 - f2) / curvature;
                vertex = std::clamp(vertex, std::max(lo, x0), std::min(hi, x0 + 2.0 * h));
                const double fv = eval(vertex);
                if (fv < best) {
                    best = fv;
                    (axis == 0 ? best_a : best_b) = vertex;
                }
            }
            h *= 0.5;
        }
    }

    est.alpha = best_a;
    est.beta = best_b;
    est.objective = best;
    return est;
}

}  // namespace twostep
