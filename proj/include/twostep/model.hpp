#ifndef TWOSTEP_MODEL_HPP
#define TWOSTEP_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "twostep/rng.hpp"

namespace twostep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Number of trailing steps averaged when reading a steady state off a
/// trajectory.
inline constexpr std::size_t kSteadyStateWindow = 20;

/// Throws ValidationError unless (alpha, beta) lies in
/// {alpha in (0.5, 1], beta > 1} or is exactly (1, 1).
void validate_preference(double alpha, double beta);

/// True for the exact pair alpha = beta = 1 (no selective exposure).
bool is_degenerate_preference(double alpha, double beta) noexcept;

/// Beta(a, b) law on [0, 1]. Used both for source messages and for drawing
/// initial opinions.
class BetaDistribution {
public:
    BetaDistribution(double a, double b);

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double mean() const noexcept { return a_ / (a_ + b_); }
    double variance() const noexcept;

    double sample(CounterRng& rng) const;

    friend bool operator==(const BetaDistribution&, const BetaDistribution&) = default;

private:
    double a_;
    double b_;
};

using MessageDistribution = BetaDistribution;

/// n independent draws; the stream position of `rng` advances.
Vector sample_messages(const MessageDistribution& dist, std::size_t n, CounterRng& rng);

/// Unnormalized message preference. Either finite and >= 0, or the tagged
/// infinite value produced by an exact opinion/message match with alpha < 1.
class PreferenceWeight {
public:
    explicit PreferenceWeight(double value);
    static PreferenceWeight infinite() noexcept { return PreferenceWeight(); }

    bool is_infinite() const noexcept { return infinite_; }
    /// Finite value; throws std::logic_error when infinite.
    double value() const;

private:
    PreferenceWeight() noexcept : value_(0.0), infinite_(true) {}

    double value_;
    bool infinite_;
};

PreferenceWeight message_preference(double m_prev, double message, double alpha, double beta);

/// Normalized preferences over `messages`. Exact matches (alpha < 1) share
/// all of the weight equally; an all-zero preference vector falls back to
/// uniform weights.
Vector selective_coefficients(double m_prev, const Vector& messages, double alpha, double beta);

/// sum_j gamma_j * s_j without materializing gamma.
double selective_average(double m_prev, const Vector& messages, double alpha, double beta);

class LeaderPopulation {
public:
    LeaderPopulation(Vector initial_opinions, Vector stubbornness, double alpha, double beta);

    std::size_t size() const noexcept { return static_cast<std::size_t>(initial_.size()); }
    const Vector& initial_opinions() const noexcept { return initial_; }
    const Vector& stubbornness() const noexcept { return sigma_; }
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }

private:
    Vector initial_;
    Vector sigma_;
    double alpha_;
    double beta_;
};

class AgentPopulation {
public:
    AgentPopulation(Vector initial_opinions, Vector rho, Vector pi, Vector theta, Matrix W,
                    Matrix U);

    std::size_t size() const noexcept { return static_cast<std::size_t>(initial_.size()); }
    std::size_t leader_count() const noexcept { return static_cast<std::size_t>(U_.cols()); }
    const Vector& initial_opinions() const noexcept { return initial_; }
    const Vector& rho() const noexcept { return rho_; }
    const Vector& pi() const noexcept { return pi_; }
    const Vector& theta() const noexcept { return theta_; }
    const Matrix& W() const noexcept { return W_; }
    const Matrix& U() const noexcept { return U_; }

private:
    Vector initial_;
    Vector rho_;
    Vector pi_;
    Vector theta_;
    Matrix W_;
    Matrix U_;
};

/// m_t[i] = sigma_i m0_i + (1 - sigma_i) * sum_j gamma_ij s_j, with gamma
/// taken at m_prev[i].
Vector leader_step(const LeaderPopulation& leaders, const Vector& m_prev, const Vector& messages);

/// Same as leader_step but also returns the p x n selective-coefficient matrix.
Vector leader_step(const LeaderPopulation& leaders, const Vector& m_prev, const Vector& messages,
                   Matrix& coefficients);

/// x_t = P x0 + Pi W x_prev + Theta U m_t.
Vector agent_step(const AgentPopulation& agents, const Vector& x_prev, const Vector& m_t);

struct Trajectory {
    std::vector<Vector> leader_opinions;  // index t = 0..T
    std::vector<Vector> agent_opinions;   // index t = 0..T
    std::vector<Matrix> selective_coeffs; // index t-1 for t = 1..T, empty unless recorded
    std::uint64_t seed = 0;

    std::size_t steps() const noexcept {
        return leader_opinions.empty() ? 0 : leader_opinions.size() - 1;
    }
};

struct SimulateOptions {
    std::size_t message_count = 0;  // n
    std::size_t steps = 0;          // T
    bool record_coefficients = false;
};

/// Iterates sources -> leaders -> agents for t = 1..T. Fresh messages each
/// step; agents at time t read the leader opinions of time t.
Trajectory simulate(const MessageDistribution& dist, const LeaderPopulation& leaders,
                    const AgentPopulation& agents, const SimulateOptions& options,
                    CounterRng& rng);

struct TailAverage {
    Vector leaders;
    Vector agents;
};

/// Mean of the last `window` recorded states (t = T-window+1..T), clipped to
/// the available steps.
TailAverage tail_average(const Trajectory& trajectory, std::size_t window = kSteadyStateWindow);

}  // namespace twostep

#endif  // TWOSTEP_MODEL_HPP
