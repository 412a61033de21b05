#ifndef TWOSTEP_DATASET_HPP
#define TWOSTEP_DATASET_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "twostep/calibration.hpp"
#include "twostep/model.hpp"

namespace twostep {

enum class Role { leader, agent };

std::string_view to_string(Role role) noexcept;

/// One subject of one scenario.
///
/// Leader rows: `messages` are the messages the leader was shown and
/// `weights` (optional) the selective coefficients observed over them.
///
/// Agent rows: `weights` has one entry per subject of the scenario, in the
/// order the scenario's rows first appear, and sums to 1. The agent's own
/// stubbornness comes from `stubbornness`; the remaining 1 - rho is split
/// between peers and leaders in proportion to these entries.
struct ObservedRow {
    std::string scenario_id;
    std::string subject_id;
    Role role = Role::leader;
    double initial_opinion = 0.0;
    double final_opinion = 0.0;
    double stubbornness = 0.0;
    std::vector<double> weights;
    std::vector<double> messages;

    friend bool operator==(const ObservedRow&, const ObservedRow&) = default;
};

struct ObservedDataset {
    std::vector<ObservedRow> rows;

    friend bool operator==(const ObservedDataset&, const ObservedDataset&) = default;
};

inline constexpr std::string_view kDatasetHeader =
    "scenario_id,subject_id,role,initial_opinion,final_opinion,stubbornness,weights,messages";

/// Parses and validates the CSV. All schema violations are collected and
/// thrown together as a DatasetError with 1-based data-row numbers.
ObservedDataset read_observed_dataset(std::istream& in);
ObservedDataset load_observed_dataset(const std::string& path);

void write_observed_dataset(std::ostream& out, const ObservedDataset& dataset);
void save_observed_dataset(const ObservedDataset& dataset, const std::string& path);

/// Row-level and cross-row checks; throws DatasetError.
void validate_dataset(const ObservedDataset& dataset);

/// Rows of one scenario, in file order.
struct Scenario {
    std::string id;
    std::vector<std::size_t> rows;     // all rows, defines the weight column order
    std::vector<std::size_t> leaders;  // subset of rows with role leader
    std::vector<std::size_t> agents;   // subset of rows with role agent
};

/// Scenarios in order of first appearance.
std::vector<Scenario> group_scenarios(const ObservedDataset& dataset);

/// Agent population of one scenario built from the agent rows' weights.
/// Leader columns of U follow the order of `scenario.leaders`.
AgentPopulation scenario_agents(const ObservedDataset& dataset, const Scenario& scenario);

/// Leader rows that carry observed weights, as estimator input. The previous
/// opinion is the row's initial opinion.
std::vector<PreferenceObservation> preference_observations(const ObservedDataset& dataset);

/// Report label of a scenario: the id up to its first '/'.
std::string scenario_label(const std::string& scenario_id);

}  // namespace twostep

#endif  // TWOSTEP_DATASET_HPP
