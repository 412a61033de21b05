#include "twostep/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "twostep/errors.hpp"
#include "twostep/quadrature.hpp"

namespace twostep {

namespace {

constexpr double kResidualLimit = 1e-10;

void require_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError(field, "must be positive and finite");
    }
}

void require_unit(double v, const char* field) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError(field, "must lie in [0, 1] (got " + std::to_string(v) + ")");
    }
}

}  // namespace

std::string_view to_string(SteadyStateMethod method) noexcept {
    switch (method) {
        case SteadyStateMethod::analytic:
            return "analytic";
        case SteadyStateMethod::fixed_point:
            return "fixed_point";
        case SteadyStateMethod::simulation:
            return "simulation";
    }
    return "unknown";
}

SampleStats sample_stats(const Vector& values) {
    if (values.size() == 0) {
        throw ValidationError("values", "sample statistics of an empty vector");
    }
    const double k = static_cast<double>(values.size());
    const double mean = values.sum() / k;
    const double variance = (values.array() - mean).square().sum() / k;
    return {mean, variance};
}

double modified_stubbornness(double sigma, double alpha, double beta,
                             const LeaderConstants& constants) {
    validate_preference(alpha, beta);
    require_unit(sigma, "sigma");
    require_positive(constants.lambda, "lambda");
    require_positive(constants.kappa, "kappa");
    const double exponent =
        (constants.lambda * std::log(alpha) + 1.0) / (constants.kappa * (beta - 1.0) + 1.0);
    if (!(exponent > 0.0)) {
        throw ValidationError("lambda", "modified stubbornness exponent " +
                                            std::to_string(exponent) + " is not positive");
    }
    return std::pow(sigma, exponent);
}

Vector leader_ss_degenerate(const LeaderPopulation& leaders, double mu) {
    if (!is_degenerate_preference(leaders.alpha(), leaders.beta())) {
        throw ValidationError("alpha", "degenerate steady state requires alpha = beta = 1");
    }
    require_unit(mu, "mu");
    const auto& sigma = leaders.stubbornness();
    const auto& m0 = leaders.initial_opinions();
    Vector out(m0.size());
    for (Eigen::Index i = 0; i < m0.size(); ++i) {
        out[i] = sigma[i] * m0[i] + (1.0 - sigma[i]) * mu;
    }
    return out;
}

Vector leader_ss_analytic(const LeaderPopulation& leaders, double mu,
                          const LeaderConstants& constants) {
    require_unit(mu, "mu");
    const auto& sigma = leaders.stubbornness();
    const auto& m0 = leaders.initial_opinions();
    Vector out(m0.size());
    for (Eigen::Index i = 0; i < m0.size(); ++i) {
        const double z = modified_stubbornness(sigma[i], leaders.alpha(), leaders.beta(), constants);
        out[i] = std::clamp(z * m0[i] + (1.0 - z) * mu, 0.0, 1.0);
    }
    return out;
}

SelectiveExpectation::SelectiveExpectation(const MessageDistribution& dist, double alpha,
                                           double beta)
    : a_(dist.a()), b_(dist.b()), alpha_(alpha), beta_(beta) {
    validate_preference(alpha, beta);
}

double SelectiveExpectation::operator()(double m) const {
    require_unit(m, "m");
    const double kernel_exp = 2.0 * alpha_ - 2.0;  // w ~ d^(2 alpha - 2) near s = m
    const double lower_exp = a_ - 1.0;             // density ~ s^(a - 1) near 0
    const double upper_exp = b_ - 1.0;             // density ~ (1 - s)^(b - 1) near 1

    // Unnormalized density times kernel, given s, 1 - s and d = |s - m|.
    auto weight = [&](double s, double one_minus_s, double d) {
        double w = 1.0;
        if (alpha_ != 1.0) {
            w *= std::pow(d, kernel_exp);
        }
        if (beta_ != 1.0) {
            w *= std::pow(std::max(0.0, (1.0 - d) * (1.0 + d)), beta_ - 1.0);
        }
        if (a_ != 1.0) {
            w *= std::pow(s, lower_exp);
        }
        if (b_ != 1.0) {
            w *= std::pow(one_minus_s, upper_exp);
        }
        return w;
    };

    // When m sits on a support end the two singularities merge; if the merged
    // exponent is not integrable the normalized weight collapses onto m.
    const double left_end_exp = (m == 0.0) ? kernel_exp + lower_exp : kernel_exp;
    const double right_end_exp = (m == 1.0) ? kernel_exp + upper_exp : kernel_exp;
    if (left_end_exp <= -1.0 || right_end_exp <= -1.0) {
        return m;
    }

    double numerator = 0.0;
    double denominator = 0.0;

    // s in [m, 1]: left end at s = m, right end at s = 1.
    const double upper_len = 1.0 - m;
    if (upper_len > 0.0) {
        auto at = [&](double from_m, double from_one, bool with_s) {
            const bool near_m = from_m <= from_one;
            const double s = near_m ? m + from_m : 1.0 - from_one;
            const double one_minus_s = near_m ? upper_len - from_m : from_one;
            const double w = weight(s, one_minus_s, from_m);
            return with_s ? w * s : w;
        };
        numerator += quadrature::integrate_endpoint_powers(
            [&](double l, double r) { return at(l, r, true); }, upper_len, left_end_exp, upper_exp);
        denominator += quadrature::integrate_endpoint_powers(
            [&](double l, double r) { return at(l, r, false); }, upper_len, left_end_exp,
            upper_exp);
    }

    // s in [0, m]: left end at s = 0, right end at s = m.
    if (m > 0.0) {
        auto at = [&](double from_zero, double from_m, bool with_s) {
            const bool near_zero = from_zero <= from_m;
            const double s = near_zero ? from_zero : m - from_m;
            const double one_minus_s = near_zero ? 1.0 - s : (1.0 - m) + from_m;
            const double w = weight(s, one_minus_s, from_m);
            return with_s ? w * s : w;
        };
        numerator += quadrature::integrate_endpoint_powers(
            [&](double l, double r) { return at(l, r, true); }, m, lower_exp, right_end_exp);
        denominator += quadrature::integrate_endpoint_powers(
            [&](double l, double r) { return at(l, r, false); }, m, lower_exp, right_end_exp);
    }

    if (!(denominator > 0.0) || !std::isfinite(denominator)) {
        return m;
    }
    return std::clamp(numerator / denominator, 0.0, 1.0);
}

FixedPointResult leader_ss_fixed_point(double sigma, double m0, const MessageDistribution& dist,
                                       double alpha, double beta,
                                       const FixedPointOptions& options) {
    require_unit(sigma, "sigma");
    require_unit(m0, "m0");
    require_positive(options.tolerance, "tolerance");
    if (!(options.damping > 0.0 && options.damping <= 1.0)) {
        throw ValidationError("damping", "must lie in (0, 1]");
    }
    const SelectiveExpectation expectation(dist, alpha, beta);
    auto g = [&](double m) { return sigma * m0 + (1.0 - sigma) * expectation(m); };

    FixedPointResult result;
    double m = m0;
    double best = std::numeric_limits<double>::infinity();
    std::size_t since_improvement = 0;
    for (std::size_t k = 0; k < options.max_iterations; ++k) {
        const double gm = g(m);
        const double residual = std::abs(gm - m);
        result.iterations = k + 1;
        if (residual <= options.tolerance) {
            result.value = m;
            result.residual = residual;
            return result;
        }
        if (residual < 0.9 * best) {
            best = residual;
            since_improvement = 0;
        } else if (++since_improvement >= options.stagnation_window) {
            break;
        }
        m = (1.0 - options.damping) * m + options.damping * gm;
    }

    // h(m) = g(m) - m satisfies h(0) >= 0 >= h(1), so [0, 1] always brackets.
    result.bisection = true;
    double lo = 0.0;
    double hi = 1.0;
    double mid = 0.5;
    double h_mid = g(mid) - mid;
    for (int k = 0; k < 200 && std::abs(h_mid) > options.tolerance; ++k) {
        if (h_mid > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        h_mid = g(mid) - mid;
        ++result.iterations;
        if (hi - lo < 1e-16) {
            break;
        }
    }
    if (std::abs(h_mid) > options.tolerance) {
        throw NoConvergence("leader steady-state fixed point", std::abs(h_mid));
    }
    result.value = mid;
    result.residual = std::abs(h_mid);
    return result;
}

Vector leader_ss_fixed_point(const LeaderPopulation& leaders, const MessageDistribution& dist,
                             const FixedPointOptions& options) {
    const auto& sigma = leaders.stubbornness();
    const auto& m0 = leaders.initial_opinions();
    Vector out(m0.size());
    for (Eigen::Index i = 0; i < m0.size(); ++i) {
        out[i] = leader_ss_fixed_point(sigma[i], m0[i], dist, leaders.alpha(), leaders.beta(),
                                       options)
                     .value;
    }
    return out;
}

double agent_ss_residual(const AgentPopulation& agents, const Vector& leader_ss, const Vector& x) {
    Vector rhs = agents.rho().cwiseProduct(agents.initial_opinions());
    if (leader_ss.size() > 0) {
        rhs += agents.theta().cwiseProduct(agents.U() * leader_ss);
    }
    const Vector lhs = x - agents.pi().cwiseProduct(agents.W() * x);
    return (lhs - rhs).lpNorm<Eigen::Infinity>();
}

Vector agent_ss(const AgentPopulation& agents, const Vector& leader_ss) {
    const Eigen::Index q = static_cast<Eigen::Index>(agents.size());
    if (leader_ss.size() != static_cast<Eigen::Index>(agents.leader_count())) {
        throw DimensionMismatch("agent_ss: leader steady state has length " +
                                std::to_string(leader_ss.size()) + ", expected " +
                                std::to_string(agents.leader_count()));
    }
    if (q == 0) {
        return Vector();
    }
    if (agents.pi().maxCoeff() >= 1.0) {
        throw SingularSystem("agent_ss: some agent has pi = 1 (rho + theta = 0), I - Pi W is singular");
    }
    Vector rhs = agents.rho().cwiseProduct(agents.initial_opinions());
    if (leader_ss.size() > 0) {
        rhs += agents.theta().cwiseProduct(agents.U() * leader_ss);
    }

    Vector x;
    if (static_cast<std::size_t>(q) <= kDirectSolveLimit) {
        const Matrix system =
            Matrix::Identity(q, q) - agents.pi().asDiagonal() * agents.W();
        x = system.partialPivLu().solve(rhs);
    } else {
        // Contraction with factor max pi < 1 in the infinity norm.
        x = rhs;
        for (int k = 0; k < 100000; ++k) {
            Vector next = rhs + agents.pi().cwiseProduct(agents.W() * x);
            const double step = (next - x).lpNorm<Eigen::Infinity>();
            x = std::move(next);
            if (step <= 1e-14) {
                break;
            }
        }
    }
    x = x.unaryExpr([](double v) { return std::clamp(v, 0.0, 1.0); });
    const double residual = agent_ss_residual(agents, leader_ss, x);
    if (!(residual <= kResidualLimit)) {
        throw SingularSystem("agent_ss: residual " + std::to_string(residual) +
                             " exceeds 1e-10");
    }
    return x;
}

double agent_ss_scalar_closed_form(double rho, double pi, double theta, double x0_i,
                                   double x0_mean, double leader_ss_mean) {
    require_unit(rho, "rho");
    require_unit(pi, "pi");
    require_unit(theta, "theta");
    if (std::abs(rho + pi + theta - 1.0) > 1e-12) {
        throw ValidationError("rho", "rho + pi + theta must equal 1");
    }
    if (!(rho + theta > 0.0)) {
        throw ValidationError("rho", "rho + theta must be positive");
    }
    const double denom = rho + theta;
    return rho * x0_i + ((1.0 - rho - theta) * rho / denom) * x0_mean +
           (theta / denom) * leader_ss_mean;
}

PredictedStats predicted_stats(const ScalarRegime& r) {
    require_unit(r.rho, "rho");
    require_unit(r.theta, "theta");
    require_unit(r.mu, "mu");
    if (!(r.rho + r.theta > 0.0)) {
        throw ValidationError("rho", "rho + theta must be positive");
    }
    const double z = modified_stubbornness(r.sigma, r.alpha, r.beta, r.constants);
    PredictedStats out;
    out.leaders.mean = z * r.leader_initial.mean + (1.0 - z) * r.mu;
    out.leaders.variance = z * z * r.leader_initial.variance;
    out.agents.mean = (r.rho * r.agent_initial.mean + r.theta * out.leaders.mean) / (r.rho + r.theta);
    out.agents.variance = r.rho * r.rho * r.agent_initial.variance;
    return out;
}

SteadyStateResult predict_steady_state(const LeaderPopulation& leaders,
                                       const AgentPopulation& agents,
                                       const MessageDistribution& dist,
                                       const LeaderConstants& constants) {
    SteadyStateResult result;
    result.leader_ss = leader_ss_analytic(leaders, dist.mean(), constants);
    result.agent_ss = agent_ss(agents, result.leader_ss);
    result.method = SteadyStateMethod::analytic;
    result.constants_used = constants;
    return result;
}

}  // namespace twostep
