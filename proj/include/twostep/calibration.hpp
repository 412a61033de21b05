#ifndef TWOSTEP_CALIBRATION_HPP
#define TWOSTEP_CALIBRATION_HPP

#include <cstddef>
#include <vector>

#include "twostep/model.hpp"
#include "twostep/steady_state.hpp"

namespace twostep {

/// Grids over which fixed-point steady states are compared with the
/// power-law approximation m~ = sigma^w m0 + (1 - sigma^w) mu.
struct CalibrationGrid {
    std::vector<double> sigma{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<double> m0{0.1, 0.3, 0.5, 0.7, 0.9};
    FixedPointOptions solver{};
};

/// Least-squares exponent of one preference setting.
struct ExponentFit {
    double w = 1.0;
    double rms_residual = 0.0;  // RMS of m~ residuals over the grid
};

/// Exponent w minimizing sum over the grid of
/// (m~_fp - [sigma^w m0 + (1 - sigma^w) mu])^2, with m~_fp from the fixed
/// point at (alpha, beta).
ExponentFit fit_exponent(const MessageDistribution& dist, double alpha, double beta,
                         const CalibrationGrid& grid = {});

/// fit_exponent at alpha = 1.
ExponentFit solve_w_beta(const MessageDistribution& dist, double beta,
                         const CalibrationGrid& grid = {});

/// One fitted law w(x) over a parameter grid.
struct LawFit {
    double constant = 0.0;             // kappa or lambda
    std::vector<double> grid;          // beta or alpha values
    std::vector<double> w;             // exponents measured against the oracle
    std::vector<double> residuals;     // w - law(grid)
    double rms_residual = 0.0;
};

/// Least squares for w_beta = 1 / (kappa (beta - 1) + 1) on given samples.
LawFit fit_kappa_law(const std::vector<double>& betas, const std::vector<double>& w);

/// Least squares for w_alpha = lambda ln(alpha) + 1 on given samples; the
/// anchor w(1) = 1 holds by construction.
LawFit fit_lambda_law(const std::vector<double>& alphas, const std::vector<double>& w);

/// Measures w_beta on `beta_grid` (each in (1, 5], at least five points) and
/// fits kappa.
LawFit fit_kappa(const MessageDistribution& dist, const std::vector<double>& beta_grid,
                 const CalibrationGrid& grid = {});

/// For each alpha, measures the total exponent e(alpha) at beta_ref and sets
/// w_alpha = e(alpha) / e(1), so w_alpha(1) = 1 exactly; then fits lambda.
/// alpha_grid must lie in (0.5, 1] with at least five points.
LawFit fit_lambda(const MessageDistribution& dist, const std::vector<double>& alpha_grid,
                  double beta_ref, const CalibrationGrid& grid = {});

struct FitResult {
    double lambda = 0.0;
    double kappa = 0.0;
    LawFit lambda_law;
    LawFit kappa_law;
    std::vector<double> per_point_residuals;  // kappa residuals then lambda residuals
    double rms_residual = 0.0;
};

struct ConstantsFitOptions {
    std::vector<double> beta_grid{1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
    std::vector<double> alpha_grid{0.6, 0.7, 0.8, 0.9, 1.0};
    double beta_ref = 2.0;
    CalibrationGrid grid{};
};

FitResult fit_constants(const MessageDistribution& dist, const ConstantsFitOptions& options = {});

/// One leader's observed message weighting.
struct PreferenceObservation {
    double m_prev = 0.0;
    Vector messages;
    Vector observed_weights;
};

/// Throws ValidationError when lengths differ, entries leave [0, 1] or the
/// weights are not a probability vector.
void validate_observation(const PreferenceObservation& obs);

struct PreferenceEstimate {
    double alpha = 1.0;
    double beta = 1.0;
    double objective = 0.0;         // sum of squared weight errors at the estimate
    double grid_objective = 0.0;    // best objective on the coarse grid
    std::size_t used = 0;           // observations entering the objective
    std::size_t excluded = 0;       // dropped because of exact matches
};

struct PreferenceSearchOptions {
    double step = 0.01;
    double beta_max = 5.0;
    std::size_t refinement_rounds = 6;
};

/// Sum over observations of ||gamma(m_prev, messages, alpha, beta) - observed||^2.
double preference_objective(const std::vector<PreferenceObservation>& observations, double alpha,
                            double beta);

/// Nonlinear least squares over the admissible region: coarse grid over
/// (0.5, 1] x (1, beta_max] (plus the point (1, 1)), then local quadratic
/// refinement that is only accepted when it lowers the objective.
/// Observations containing an exact opinion/message match are excluded.
/// Throws DegenerateData when no observation can discriminate between
/// preference settings.
PreferenceEstimate estimate_preference_coeffs(const std::vector<PreferenceObservation>& observations,
                                              const PreferenceSearchOptions& options = {});

}  // namespace twostep

#endif  // TWOSTEP_CALIBRATION_HPP
