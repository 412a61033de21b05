#ifndef TWOSTEP_STEADY_STATE_HPP
#define TWOSTEP_STEADY_STATE_HPP

#include <cstddef>
#include <optional>
#include <string_view>

#include "twostep/model.hpp"

namespace twostep {

/// Fitted constants of the modified-stubbornness exponent
/// (lambda ln alpha + 1) / (kappa (beta - 1) + 1).
struct LeaderConstants {
    double lambda = 1.15;
    double kappa = 0.18;

    friend bool operator==(const LeaderConstants&, const LeaderConstants&) = default;
};

enum class SteadyStateMethod { analytic, fixed_point, simulation };

std::string_view to_string(SteadyStateMethod method) noexcept;

struct SteadyStateResult {
    Vector leader_ss;
    Vector agent_ss;
    SteadyStateMethod method = SteadyStateMethod::analytic;
    std::optional<LeaderConstants> constants_used;
};

/// Population-form (1/k) moments.
struct SampleStats {
    double mean = 0.0;
    double variance = 0.0;
};

SampleStats sample_stats(const Vector& values);

/// z = sigma^((lambda ln alpha + 1) / (kappa (beta - 1) + 1)).
double modified_stubbornness(double sigma, double alpha, double beta,
                             const LeaderConstants& constants = {});

/// alpha = beta = 1 only: m~_i = sigma_i m0_i + (1 - sigma_i) mu.
Vector leader_ss_degenerate(const LeaderPopulation& leaders, double mu);

/// m~_i = z_i m0_i + (1 - z_i) mu.
Vector leader_ss_analytic(const LeaderPopulation& leaders, double mu,
                          const LeaderConstants& constants = {});

/// E[w(m, s) s] / E[w(m, s)] for s ~ Beta(a, b), where
/// w(m, s) = ((m - s)^2)^(alpha - 1) (1 - (m - s)^2)^(beta - 1).
/// Evaluated by splitting at s = m and removing the endpoint power
/// singularities (at s = m and at the support ends) by substitution.
class SelectiveExpectation {
public:
    SelectiveExpectation(const MessageDistribution& dist, double alpha, double beta);

    double operator()(double m) const;

private:
    double a_;
    double b_;
    double alpha_;
    double beta_;
};

struct FixedPointOptions {
    double tolerance = 1e-8;
    double damping = 0.5;
    std::size_t max_iterations = 10000;
    /// Iterations without a 10% residual improvement before switching to
    /// bisection.
    std::size_t stagnation_window = 200;
};

struct FixedPointResult {
    double value = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool bisection = false;
};

/// Solves m = sigma m0 + (1 - sigma) E[w(m, s) s] / E[w(m, s)] for one leader.
/// Damped iteration first, bisection on g(m) - m over [0, 1] as a fallback.
/// Throws NoConvergence if neither reaches the tolerance.
FixedPointResult leader_ss_fixed_point(double sigma, double m0, const MessageDistribution& dist,
                                       double alpha, double beta,
                                       const FixedPointOptions& options = {});

/// Population version; one independent solve per leader.
Vector leader_ss_fixed_point(const LeaderPopulation& leaders, const MessageDistribution& dist,
                             const FixedPointOptions& options = {});

/// Solves (I - Pi W) x = P x0 + Theta U m~. Dense LU up to
/// kDirectSolveLimit agents, stationary iteration above. Throws
/// SingularSystem when some pi_i = 1.
Vector agent_ss(const AgentPopulation& agents, const Vector& leader_ss);

inline constexpr std::size_t kDirectSolveLimit = 2000;

/// ||(I - Pi W) x - P x0 - Theta U m~||_inf.
double agent_ss_residual(const AgentPopulation& agents, const Vector& leader_ss, const Vector& x);

/// Per-agent closed form in the scalar-matrix, uniform-influence regime.
double agent_ss_scalar_closed_form(double rho, double pi, double theta, double x0_i,
                                   double x0_mean, double leader_ss_mean);

/// Inputs of the scalar regime (Sigma = sigma I, P = rho I, Theta = theta I,
/// uniform W and U).
struct ScalarRegime {
    double sigma = 0.5;
    double rho = 1.0 / 3.0;
    double theta = 1.0 / 3.0;
    double alpha = 1.0;
    double beta = 2.0;
    double mu = 0.5;
    SampleStats leader_initial;
    SampleStats agent_initial;
    LeaderConstants constants;
};

struct PredictedStats {
    SampleStats leaders;
    SampleStats agents;
};

PredictedStats predicted_stats(const ScalarRegime& regime);

/// Analytic leader prediction followed by the linear agent solve.
SteadyStateResult predict_steady_state(const LeaderPopulation& leaders,
                                       const AgentPopulation& agents,
                                       const MessageDistribution& dist,
                                       const LeaderConstants& constants = {});

}  // namespace twostep

#endif  // TWOSTEP_STEADY_STATE_HPP
