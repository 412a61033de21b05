#ifndef TWOSTEP_EXPERIMENTS_HPP
#define TWOSTEP_EXPERIMENTS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twostep/config.hpp"
#include "twostep/model.hpp"
#include "twostep/results.hpp"
#include "twostep/steady_state.hpp"

namespace twostep {

/// Row-stochastic (W, U) of shapes q x q and q x p. Uniform mode gives
/// W = 1/q and U = 1/p everywhere; random mode draws entries in (0, 1] and
/// normalizes each row. Explicit matrices come from the config instead, so
/// that mode is rejected here.
std::pair<Matrix, Matrix> generate_matrices(MatrixMode mode, std::size_t q, std::size_t p,
                                            CounterRng& rng);

/// Everything one run needs, drawn from a config.
struct Populations {
    MessageDistribution messages;
    LeaderPopulation leaders;
    AgentPopulation agents;
};

/// Draws leader initial opinions, agent initial opinions, then (if
/// `randomize_entities`) sigma_i ~ U(0, 1) and (rho_i, pi_i, theta_i) as a
/// normalized triple of U(0, 1) draws, then the matrices.
Populations build_populations(const ExperimentConfig& config, CounterRng& rng,
                              bool randomize_entities = false);

struct RunOutcome {
    Populations populations;
    TailAverage simulated;       // tail average of the trajectory
    SteadyStateResult predicted; // analytic leaders, linear-solve agents
    std::uint64_t seed = 0;      // key of the run's stream
};

/// Replicate `replicate` of the config: stream substream(master_seed, replicate)
/// draws the populations and then drives the simulation.
RunOutcome run_replicate(const ExperimentConfig& config, std::size_t replicate,
                         bool randomize_entities = false);

/// Pearson correlation; nullopt when either vector is constant.
std::optional<double> pearson(const Vector& x, const Vector& y);

struct CorrelationOptions {
    std::size_t replicates = 5;
    bool randomize_entities = true;
};

struct CorrelationRow {
    std::size_t n = 0;
    std::size_t replicates = 0;
    std::optional<double> r_leaders;  // mean over replicates where defined
    std::optional<double> r_agents;
    std::optional<double> r_pooled;   // both populations in one vector
    std::size_t leaders_defined = 0;  // replicates with a defined coefficient
    std::size_t agents_defined = 0;
};

/// For each n: simulate, predict, correlate. Throws ValidationError("n") for
/// any n < 2.
std::vector<CorrelationRow> run_correlation_experiment(const ExperimentConfig& config,
                                                       const std::vector<std::size_t>& n_values,
                                                       const CorrelationOptions& options = {});

ResultTable correlation_table(const std::vector<CorrelationRow>& rows);

struct SweepSpec {
    ExperimentConfig base;
    std::string parameter;
    std::vector<double> values;
    std::size_t replicates = 1;
};

struct SweepRow {
    std::string parameter;
    double value = 0.0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    SampleStats simulated_leaders;
    SampleStats simulated_agents;
    SampleStats predicted_leaders;
    SampleStats predicted_agents;
};

/// Checks every grid point before running anything; errors name the swept
/// parameter.
void validate_sweep(const SweepSpec& spec);

/// One row per (value, replicate) in grid order. Replicate r of every grid
/// point uses the same stream, so neighbouring points share random numbers.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

ResultTable sweep_table(const std::vector<SweepRow>& rows);

/// Closed-form statistics when the config is in the scalar, uniform-influence
/// regime; otherwise the statistics of the full analytic prediction.
PredictedStats predict_run_stats(const ExperimentConfig& config, const Populations& populations,
                                 const SteadyStateResult& predicted);

}  // namespace twostep

#endif  // TWOSTEP_EXPERIMENTS_HPP
