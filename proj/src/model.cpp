#include "twostep/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "twostep/errors.hpp"

namespace twostep {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kRowTolerance = 1e-10;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void require_unit_interval(const Vector& v, const char* field) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
            throw ValidationError(field, "entry " + std::to_string(i) + " = " +
                                             std::to_string(v[i]) + " is outside [0, 1]");
        }
    }
}

void require_row_stochastic(const Matrix& m, const char* field) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (!(m(r, c) >= 0.0 && m(r, c) <= 1.0)) {
                throw ValidationError(field, "entry (" + std::to_string(r) + ", " +
                                                 std::to_string(c) + ") is outside [0, 1]");
            }
        }
        if (m.cols() > 0 && std::abs(m.row(r).sum() - 1.0) > kRowTolerance) {
            throw ValidationError(field, "row " + std::to_string(r) + " sums to " +
                                             std::to_string(m.row(r).sum()));
        }
    }
}

// Gamma-ratio Beta sampler; the two gamma laws are reused across draws.
class BetaSampler {
public:
    explicit BetaSampler(const BetaDistribution& d) : x_(d.a(), 1.0), y_(d.b(), 1.0) {}

    double operator()(CounterRng& rng) {
        for (;;) {
            const double x = x_(rng);
            const double y = y_(rng);
            const double sum = x + y;
            // Both draws underflow only for tiny shapes; redraw.
            if (sum > 0.0 && std::isfinite(sum)) {
                return clamp01(x / sum);
            }
        }
    }

private:
    std::gamma_distribution<double> x_;
    std::gamma_distribution<double> y_;
};

// Preference with the infinite case folded into a flag; shared by the public
// kernel and the allocation-free leader update.
struct RawPreference {
    double value;
    bool infinite;
};

inline RawPreference raw_preference(double m_prev, double s, double alpha, double beta) {
    const double d = std::abs(m_prev - s);
    if (d == 0.0 && alpha < 1.0) {
        return {0.0, true};
    }
    double p = 1.0;
    if (alpha != 1.0) {
        p *= std::pow(d * d, alpha - 1.0);
    }
    if (beta != 1.0) {
        const double one_minus_d2 = std::max(0.0, (1.0 - d) * (1.0 + d));
        p *= (beta == 2.0) ? one_minus_d2 : std::pow(one_minus_d2, beta - 1.0);
    }
    return {p, false};
}

}  // namespace

void validate_preference(double alpha, double beta) {
    if (!std::isfinite(alpha)) {
        throw ValidationError("alpha", "must be finite");
    }
    if (!std::isfinite(beta)) {
        throw ValidationError("beta", "must be finite");
    }
    if (is_degenerate_preference(alpha, beta)) {
        return;
    }
    if (!(alpha > 0.5 && alpha <= 1.0)) {
        throw ValidationError("alpha", "must lie in (0.5, 1] (got " + std::to_string(alpha) + ")");
    }
    if (!(beta > 1.0)) {
        throw ValidationError("beta", "must exceed 1 unless alpha = beta = 1 (got " +
                                          std::to_string(beta) + ")");
    }
}

bool is_degenerate_preference(double alpha, double beta) noexcept {
    return alpha == 1.0 && beta == 1.0;
}

BetaDistribution::BetaDistribution(double a, double b) : a_(a), b_(b) {
    if (!(a > 0.0) || !std::isfinite(a)) {
        throw ValidationError("a", "Beta shape must be positive and finite");
    }
    if (!(b > 0.0) || !std::isfinite(b)) {
        throw ValidationError("b", "Beta shape must be positive and finite");
    }
}

double BetaDistribution::variance() const noexcept {
    const double s = a_ + b_;
    return a_ * b_ / (s * s * (s + 1.0));
}

double BetaDistribution::sample(CounterRng& rng) const {
    BetaSampler sampler(*this);
    return sampler(rng);
}

Vector sample_messages(const MessageDistribution& dist, std::size_t n, CounterRng& rng) {
    BetaSampler sampler(dist);
    Vector out(static_cast<Eigen::Index>(n));
    for (auto& v : out) {
        v = sampler(rng);
    }
    return out;
}

PreferenceWeight::PreferenceWeight(double value) : value_(value), infinite_(false) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw std::invalid_argument("PreferenceWeight must be finite and nonnegative");
    }
}

double PreferenceWeight::value() const {
    if (infinite_) {
        throw std::logic_error("PreferenceWeight::value() on an infinite weight");
    }
    return value_;
}

PreferenceWeight message_preference(double m_prev, double message, double alpha, double beta) {
    validate_preference(alpha, beta);
    const auto raw = raw_preference(m_prev, message, alpha, beta);
    return raw.infinite ? PreferenceWeight::infinite() : PreferenceWeight(raw.value);
}

Vector selective_coefficients(double m_prev, const Vector& messages, double alpha, double beta) {
    validate_preference(alpha, beta);
    const Eigen::Index n = messages.size();
    if (n == 0) {
        throw DimensionMismatch("selective_coefficients: empty message vector");
    }
    Vector gamma(n);
    Eigen::Index infinite_count = 0;
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto raw = raw_preference(m_prev, messages[j], alpha, beta);
        if (raw.infinite) {
            ++infinite_count;
            gamma[j] = 1.0;
        } else {
            gamma[j] = raw.value;
            total += raw.value;
        }
    }
    if (infinite_count > 0) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const bool exact = messages[j] == m_prev && alpha < 1.0;
            gamma[j] = exact ? 1.0 / static_cast<double>(infinite_count) : 0.0;
        }
    } else if (total > 0.0) {
        gamma /= total;
    } else {
        gamma.setConstant(1.0 / static_cast<double>(n));
    }
    return gamma;
}

double selective_average(double m_prev, const Vector& messages, double alpha, double beta) {
    const Eigen::Index n = messages.size();
    if (n == 0) {
        throw DimensionMismatch("selective_average: empty message vector");
    }
    validate_preference(alpha, beta);
    if (is_degenerate_preference(alpha, beta)) {
        return messages.mean();
    }
    double weighted = 0.0;
    double total = 0.0;
    double exact_sum = 0.0;
    Eigen::Index exact_count = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double s = messages[j];
        const auto raw = raw_preference(m_prev, s, alpha, beta);
        if (raw.infinite) {
            ++exact_count;
            exact_sum += s;
        } else {
            weighted += raw.value * s;
            total += raw.value;
        }
    }
    if (exact_count > 0) {
        return exact_sum / static_cast<double>(exact_count);
    }
    if (total > 0.0) {
        return weighted / total;
    }
    return messages.mean();
}

LeaderPopulation::LeaderPopulation(Vector initial_opinions, Vector stubbornness, double alpha,
                                   double beta)
    : initial_(std::move(initial_opinions)),
      sigma_(std::move(stubbornness)),
      alpha_(alpha),
      beta_(beta) {
    if (initial_.size() != sigma_.size()) {
        throw DimensionMismatch("LeaderPopulation: " + std::to_string(initial_.size()) +
                                " initial opinions but " + std::to_string(sigma_.size()) +
                                " stubbornness values");
    }
    require_unit_interval(initial_, "leader_initial_opinions");
    require_unit_interval(sigma_, "sigma");
    validate_preference(alpha_, beta_);
}

AgentPopulation::AgentPopulation(Vector initial_opinions, Vector rho, Vector pi, Vector theta,
                                 Matrix W, Matrix U)
    : initial_(std::move(initial_opinions)),
      rho_(std::move(rho)),
      pi_(std::move(pi)),
      theta_(std::move(theta)),
      W_(std::move(W)),
      U_(std::move(U)) {
    const Eigen::Index q = initial_.size();
    if (rho_.size() != q || pi_.size() != q || theta_.size() != q) {
        throw DimensionMismatch("AgentPopulation: rho/pi/theta must have length " +
                                std::to_string(q));
    }
    if (W_.rows() != q || W_.cols() != q) {
        throw DimensionMismatch("AgentPopulation: W must be " + std::to_string(q) + "x" +
                                std::to_string(q));
    }
    if (U_.rows() != q) {
        throw DimensionMismatch("AgentPopulation: U must have " + std::to_string(q) + " rows");
    }
    require_unit_interval(initial_, "agent_initial_opinions");
    require_unit_interval(rho_, "rho");
    require_unit_interval(pi_, "pi");
    require_unit_interval(theta_, "theta");
    for (Eigen::Index i = 0; i < q; ++i) {
        const double sum = rho_[i] + pi_[i] + theta_[i];
        if (std::abs(sum - 1.0) > kSumTolerance) {
            throw ValidationError("rho", "rho + pi + theta = " + std::to_string(sum) +
                                             " for agent " + std::to_string(i));
        }
    }
    require_row_stochastic(W_, "W");
    if (U_.cols() > 0) {
        require_row_stochastic(U_, "U");
    } else if (theta_.size() > 0 && theta_.maxCoeff() > 0.0) {
        throw ValidationError("theta", "must be 0 when there are no opinion leaders");
    }
}

Vector leader_step(const LeaderPopulation& leaders, const Vector& m_prev, const Vector& messages) {
    const Eigen::Index p = static_cast<Eigen::Index>(leaders.size());
    if (m_prev.size() != p) {
        throw DimensionMismatch("leader_step: m_prev has length " + std::to_string(m_prev.size()) +
                                ", expected " + std::to_string(p));
    }
    if (messages.size() == 0) {
        throw DimensionMismatch("leader_step: no messages");
    }
    const auto& m0 = leaders.initial_opinions();
    const auto& sigma = leaders.stubbornness();
    Vector out(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double pulled = selective_average(m_prev[i], messages, leaders.alpha(), leaders.beta());
        out[i] = clamp01(sigma[i] * m0[i] + (1.0 - sigma[i]) * pulled);
    }
    return out;
}

Vector leader_step(const LeaderPopulation& leaders, const Vector& m_prev, const Vector& messages,
                   Matrix& coefficients) {
    const Eigen::Index p = static_cast<Eigen::Index>(leaders.size());
    if (m_prev.size() != p) {
        throw DimensionMismatch("leader_step: m_prev has length " + std::to_string(m_prev.size()) +
                                ", expected " + std::to_string(p));
    }
    if (messages.size() == 0) {
        throw DimensionMismatch("leader_step: no messages");
    }
    coefficients.resize(p, messages.size());
    const auto& m0 = leaders.initial_opinions();
    const auto& sigma = leaders.stubbornness();
    Vector out(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const Vector gamma =
            selective_coefficients(m_prev[i], messages, leaders.alpha(), leaders.beta());
        coefficients.row(i) = gamma.transpose();
        out[i] = clamp01(sigma[i] * m0[i] + (1.0 - sigma[i]) * gamma.dot(messages));
    }
    return out;
}

Vector agent_step(const AgentPopulation& agents, const Vector& x_prev, const Vector& m_t) {
    const Eigen::Index q = static_cast<Eigen::Index>(agents.size());
    if (x_prev.size() != q) {
        throw DimensionMismatch("agent_step: x_prev has length " + std::to_string(x_prev.size()) +
                                ", expected " + std::to_string(q));
    }
    if (m_t.size() != static_cast<Eigen::Index>(agents.leader_count())) {
        throw DimensionMismatch("agent_step: m_t has length " + std::to_string(m_t.size()) +
                                ", expected " + std::to_string(agents.leader_count()));
    }
    Vector out = agents.rho().cwiseProduct(agents.initial_opinions()) +
                 agents.pi().cwiseProduct(agents.W() * x_prev);
    if (m_t.size() > 0) {
        out += agents.theta().cwiseProduct(agents.U() * m_t);
    }
    return out.unaryExpr([](double v) { return clamp01(v); });
}

Trajectory simulate(const MessageDistribution& dist, const LeaderPopulation& leaders,
                    const AgentPopulation& agents, const SimulateOptions& options,
                    CounterRng& rng) {
    if (options.steps < 1) {
        throw ValidationError("T", "simulation needs at least one step");
    }
    if (options.message_count < 1) {
        throw ValidationError("n", "simulation needs at least one message source");
    }
    if (agents.leader_count() != leaders.size()) {
        throw DimensionMismatch("simulate: U has " + std::to_string(agents.leader_count()) +
                                " columns but there are " + std::to_string(leaders.size()) +
                                " leaders");
    }
    Trajectory traj;
    traj.seed = rng.key();
    traj.leader_opinions.reserve(options.steps + 1);
    traj.agent_opinions.reserve(options.steps + 1);
    traj.leader_opinions.push_back(leaders.initial_opinions());
    traj.agent_opinions.push_back(agents.initial_opinions());

    for (std::size_t t = 1; t <= options.steps; ++t) {
        const Vector messages = sample_messages(dist, options.message_count, rng);
        Vector m_t;
        if (options.record_coefficients) {
            Matrix gamma;
            m_t = leader_step(leaders, traj.leader_opinions.back(), messages, gamma);
            traj.selective_coeffs.push_back(std::move(gamma));
        } else {
            m_t = leader_step(leaders, traj.leader_opinions.back(), messages);
        }
        Vector x_t = agent_step(agents, traj.agent_opinions.back(), m_t);
        traj.leader_opinions.push_back(std::move(m_t));
        traj.agent_opinions.push_back(std::move(x_t));
    }
    return traj;
}

TailAverage tail_average(const Trajectory& trajectory, std::size_t window) {
    const std::size_t steps = trajectory.steps();
    if (steps == 0) {
        throw ValidationError("T", "trajectory has no steps");
    }
    const std::size_t w = std::clamp<std::size_t>(window, 1, steps);
    TailAverage avg{Vector::Zero(trajectory.leader_opinions.back().size()),
                    Vector::Zero(trajectory.agent_opinions.back().size())};
    for (std::size_t t = steps - w + 1; t <= steps; ++t) {
        avg.leaders += trajectory.leader_opinions[t];
        avg.agents += trajectory.agent_opinions[t];
    }
    avg.leaders /= static_cast<double>(w);
    avg.agents /= static_cast<double>(w);
    return avg;
}

}  // namespace twostep
