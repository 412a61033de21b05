#ifndef TWOSTEP_BASELINES_HPP
#define TWOSTEP_BASELINES_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twostep/dataset.hpp"
#include "twostep/model.hpp"
#include "twostep/rng.hpp"

namespace twostep {

/// Leader update rules used as comparison models. Every rule keeps the
/// stubbornness blend of the leader update,
///
///     m_i = sigma_i m0_i + (1 - sigma_i) A_i(m_prev_i, s),
///
/// and differs only in how the messages are aggregated into A_i (d_j = |m - s_j|):
///
///   HK          mean of the messages with d_j <= epsilon; m_prev when none qualify.
///               Bounded confidence (Hegselmann and Krause).
///   BOF         S = mean(s), A = m^b S / (m^b S + (1 - m)^b (1 - S)); biased
///               assimilation with bias exponent b (Dandekar, Goel and Lee).
///   SBC         message j kept with probability 1 / (1 + (d_j / epsilon)^k), then
///               HK averaging of the kept messages. Stochastic bounded confidence.
///   CSN_*       A = m + rate * mean_j f(d_j) (s_j - m) with f(0) = 1, f(1) = 0:
///               linear 1 - d, log ln(1 + (e - 1)(1 - d)), sine sin(pi (1 - d) / 2).
///               Attraction scaled by a decreasing function of distance.
enum class BaselineKind { HK, BOF, SBC, CSN_linear, CSN_log, CSN_sine };

inline constexpr std::array<BaselineKind, 6> kAllBaselines{
    BaselineKind::HK,         BaselineKind::BOF,     BaselineKind::SBC,
    BaselineKind::CSN_linear, BaselineKind::CSN_log, BaselineKind::CSN_sine};

std::string_view to_string(BaselineKind kind) noexcept;

/// Throws ValidationError("kind") for unknown names.
BaselineKind parse_baseline_kind(std::string_view name);

/// Parameter names a kind requires: HK {epsilon}, BOF {bias}, SBC {epsilon,
/// steepness}, CSN_* {rate}.
std::vector<std::string> required_parameters(BaselineKind kind);

struct BaselineSpec {
    BaselineKind kind = BaselineKind::HK;
    std::map<std::string, double> params;
};

/// Throws ValidationError naming the missing or out-of-range parameter.
/// epsilon in (0, 1], bias >= 0, steepness > 0, rate in [0, 1]; all finite.
void validate(const BaselineSpec& spec);

/// One synchronous update of every leader. `rng` is consumed only by SBC.
Vector baseline_leader_step(const BaselineSpec& spec, const Vector& m_prev, const Vector& messages,
                            const LeaderPopulation& leaders, CounterRng& rng);

/// Where the messages of each step come from: fresh Beta draws, or one fixed
/// message set reused at every step.
class MessageSource {
public:
    static MessageSource sampled(const MessageDistribution& dist, std::size_t count);
    static MessageSource fixed(Vector messages);

    Vector next(CounterRng& rng) const;

private:
    std::optional<MessageDistribution> dist_;
    std::size_t count_ = 0;
    Vector fixed_;
};

/// Leader update signature shared by the baselines and the selective-exposure
/// model.
using LeaderUpdate =
    std::function<Vector(const LeaderPopulation&, const Vector& m_prev, const Vector& messages,
                         CounterRng& rng)>;

LeaderUpdate baseline_update(const BaselineSpec& spec);
LeaderUpdate selective_update();

/// Runs the update for T steps from m0 in each of `n_runs` runs (run r uses
/// substream r of `master_seed`), takes the tail average of each run and
/// averages those over runs.
Vector predict_leader_ss(const LeaderUpdate& update, const LeaderPopulation& leaders,
                         const MessageSource& source, std::size_t T, std::uint64_t master_seed,
                         std::size_t n_runs, std::size_t window = kSteadyStateWindow);

Vector baseline_predict_ss(const BaselineSpec& spec, const LeaderPopulation& leaders,
                           const MessageSource& source, std::size_t T, std::uint64_t master_seed,
                           std::size_t n_runs);

/// sqrt(sum (pred - obs)^2 / k).
double rmse(const Vector& pred, const Vector& obs);
double rmse(const std::vector<double>& pred, const std::vector<double>& obs);

/// Parameter grid searched when fitting a baseline.
std::vector<BaselineSpec> default_parameter_grid(BaselineKind kind);

struct CompareOptions {
    double alpha = 1.0;  // selective-exposure model; estimated from the data
    double beta = 2.0;   // when `estimate_preferences` is set
    bool estimate_preferences = true;
    std::size_t steps = 100;
    std::size_t n_runs = 8;  // only stochastic rules use more than one run
    std::uint64_t seed = 0;
    bool fit_per_scenario = false;
    std::vector<BaselineKind> baselines{kAllBaselines.begin(), kAllBaselines.end()};
};

struct ComparisonRow {
    std::string scenario;             // label, or "Overall"
    std::vector<double> leader_rmse;  // one per model; NaN when there are no leaders
    std::vector<double> agent_rmse;   // one per model; NaN when there are no agents
    std::size_t leader_count = 0;
    std::size_t agent_count = 0;
};

struct ComparisonReport {
    std::vector<std::string> models;       // baselines in order, then "MP"
    std::vector<ComparisonRow> rows;       // per label, then the overall row
    std::vector<BaselineSpec> fitted;      // globally fitted parameters per baseline
    double alpha = 1.0;                    // preference used for the MP column
    double beta = 2.0;

    const ComparisonRow& overall() const { return rows.back(); }
};

/// RMSE comparison of every model. For each one, leaders iterate their rule on
/// the messages they were shown; agents then take the linear steady state
/// driven by those leader predictions. Baseline parameters are chosen by grid
/// search on leader RMSE (pooled, or per label when fit_per_scenario).
ComparisonReport compare_models(const ObservedDataset& dataset, const CompareOptions& options = {});

struct SyntheticDatasetOptions {
    std::size_t scenarios = 6;
    std::size_t groups = 10;         // per scenario label
    std::size_t leaders = 2;         // per group
    std::size_t agents = 4;          // per group
    std::size_t messages = 8;        // shown to each leader
    double alpha = 0.8;
    double beta = 2.1;
    double noise = 0.0;              // Gaussian noise on final opinions, clipped
    std::size_t steps = 100;
    std::uint64_t seed = 0;
};

/// Dataset whose final opinions come from the selective-exposure model itself.
/// Scenario ids are "S<k>/g<j>" so reports group by "S<k>".
ObservedDataset generate_mp_dataset(const SyntheticDatasetOptions& options);

}  // namespace twostep

#endif  // TWOSTEP_BASELINES_HPP
