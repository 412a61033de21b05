#include "twostep/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/tokenizer.hpp>

#include "twostep/errors.hpp"

namespace twostep {

namespace {

constexpr double kWeightSumTolerance = 1e-6;
constexpr std::size_t kColumns = 8;

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) {
        ++b;
    }
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

bool parse_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) {
        return false;
    }
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_list(const std::string& text, std::vector<double>& out) {
    out.clear();
    const std::string t = trim(text);
    if (t.empty()) {
        return true;
    }
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ';')) {
        double v = 0.0;
        if (!parse_double(item, v)) {
            return false;
        }
        out.push_back(v);
    }
    return true;
}

std::vector<std::string> split_csv(const std::string& line) {
    using Separator = boost::escaped_list_separator<char>;
    boost::tokenizer<Separator> tok(line, Separator('\\', ',', '"'));
    return {tok.begin(), tok.end()};
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out += ';';
        }
        out += format_number(values[i]);
    }
    return out;
}

std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n\\") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    out += '"';
    return out;
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s;
}

// Checks that do not need the rest of the scenario.
void check_row(const ObservedRow& row, std::vector<std::string>& problems) {
    if (row.scenario_id.empty()) {
        problems.emplace_back("scenario_id is empty");
    }
    if (row.subject_id.empty()) {
        problems.emplace_back("subject_id is empty");
    }
    if (!in_unit(row.initial_opinion)) {
        problems.emplace_back("initial_opinion must lie in [0, 1]");
    }
    if (!in_unit(row.final_opinion)) {
        problems.emplace_back("final_opinion must lie in [0, 1]");
    }
    if (!in_unit(row.stubbornness)) {
        problems.emplace_back("stubbornness must lie in [0, 1]");
    }
    for (double m : row.messages) {
        if (!in_unit(m)) {
            problems.emplace_back("messages must lie in [0, 1]");
            break;
        }
    }
    for (double w : row.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            problems.emplace_back("weights must be nonnegative");
            break;
        }
    }
    if (!row.weights.empty() && std::abs(sum(row.weights) - 1.0) > kWeightSumTolerance) {
        problems.emplace_back("weights must sum to 1");
    }
    if (row.role == Role::leader) {
        if (row.messages.empty()) {
            problems.emplace_back("leader row needs at least one message");
        }
        if (!row.weights.empty() && row.weights.size() != row.messages.size()) {
            problems.emplace_back("leader weights must align with messages");
        }
    }
}

std::string join(const std::vector<std::string>& problems) {
    std::string joined;
    for (const auto& p : problems) {
        joined += joined.empty() ? p : "; " + p;
    }
    return joined;
}

void check_scenarios(const ObservedDataset& dataset, std::map<std::size_t, std::string>& problems) {
    for (const auto& scenario : group_scenarios(dataset)) {
        std::set<std::string> seen;
        for (std::size_t idx : scenario.rows) {
            if (!seen.insert(dataset.rows[idx].subject_id).second) {
                problems.emplace(idx, "subject '" + dataset.rows[idx].subject_id +
                                          "' appears twice in scenario '" + scenario.id + "'");
            }
        }
        for (std::size_t idx : scenario.agents) {
            const auto& row = dataset.rows[idx];
            if (row.weights.size() != scenario.rows.size()) {
                problems.emplace(idx, "agent weights need one entry per subject of scenario '" +
                                          scenario.id + "' (" +
                                          std::to_string(scenario.rows.size()) + "), got " +
                                          std::to_string(row.weights.size()));
                continue;
            }
            double leader_share = 0.0;
            for (std::size_t k = 0; k < scenario.rows.size(); ++k) {
                if (dataset.rows[scenario.rows[k]].role == Role::leader) {
                    leader_share += row.weights[k];
                }
            }
            if (row.stubbornness == 0.0 && leader_share == 0.0) {
                problems.emplace(idx, "agent has neither stubbornness nor leader weight; "
                                      "its steady state is undetermined");
            }
        }
    }
}

}  // namespace

std::string_view to_string(Role role) noexcept {
    return role == Role::leader ? "leader" : "agent";
}

void validate_dataset(const ObservedDataset& dataset) {
    std::map<std::size_t, std::string> problems;
    for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
        std::vector<std::string> row_problems;
        check_row(dataset.rows[i], row_problems);
        if (!row_problems.empty()) {
            problems.emplace(i, join(row_problems));
        }
    }
    if (problems.empty()) {
        check_scenarios(dataset, problems);
    }
    if (dataset.rows.empty()) {
        throw DatasetError({RowError{0, "dataset has no rows"}});
    }
    if (!problems.empty()) {
        std::vector<RowError> errors;
        for (const auto& [idx, msg] : problems) {
            errors.push_back({idx + 1, msg});
        }
        throw DatasetError(std::move(errors));
    }
}

ObservedDataset read_observed_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DatasetError({RowError{0, "missing header"}});
    }
    if (trim(line) != kDatasetHeader) {
        throw DatasetError({RowError{0, "header must be '" + std::string(kDatasetHeader) + "'"}});
    }
    ObservedDataset dataset;
    std::vector<RowError> errors;
    std::size_t row_number = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) {
            continue;
        }
        ++row_number;
        std::vector<std::string> fields;
        try {
            fields = split_csv(trim(line));
        } catch (const boost::escaped_list_error& e) {
            errors.push_back({row_number, std::string("malformed CSV: ") + e.what()});
            continue;
        }
        if (fields.size() != kColumns) {
            errors.push_back({row_number, "expected 8 columns, got " + std::to_string(fields.size())});
            continue;
        }
        ObservedRow row;
        row.scenario_id = trim(fields[0]);
        row.subject_id = trim(fields[1]);
        const std::string role = trim(fields[2]);
        std::string problem;
        if (role == "leader") {
            row.role = Role::leader;
        } else if (role == "agent") {
            row.role = Role::agent;
        } else {
            problem = "role must be 'leader' or 'agent', got '" + role + "'";
        }
        if (problem.empty() && !parse_double(fields[3], row.initial_opinion)) {
            problem = "initial_opinion is not a number";
        }
        if (problem.empty() && !parse_double(fields[4], row.final_opinion)) {
            problem = "final_opinion is not a number";
        }
        if (problem.empty() && !parse_double(fields[5], row.stubbornness)) {
            problem = "stubbornness is not a number";
        }
        if (problem.empty() && !parse_list(fields[6], row.weights)) {
            problem = "weights must be semicolon-separated numbers";
        }
        if (problem.empty() && !parse_list(fields[7], row.messages)) {
            problem = "messages must be semicolon-separated numbers";
        }
        if (!problem.empty()) {
            errors.push_back({row_number, problem});
            continue;
        }
        std::vector<std::string> row_problems;
        check_row(row, row_problems);
        if (!row_problems.empty()) {
            errors.push_back({row_number, join(row_problems)});
        }
        dataset.rows.push_back(std::move(row));
    }
    if (!errors.empty()) {
        throw DatasetError(std::move(errors));
    }
    validate_dataset(dataset);
    return dataset;
}

ObservedDataset load_observed_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DatasetError({RowError{0, "cannot open '" + path + "'"}});
    }
    return read_observed_dataset(in);
}

void write_observed_dataset(std::ostream& out, const ObservedDataset& dataset) {
    out << kDatasetHeader << '\n';
    for (const auto& row : dataset.rows) {
        out << quote_if_needed(row.scenario_id) << ',' << quote_if_needed(row.subject_id) << ','
            << to_string(row.role) << ',' << format_number(row.initial_opinion) << ','
            << format_number(row.final_opinion) << ',' << format_number(row.stubbornness) << ','
            << join(row.weights) << ',' << join(row.messages) << '\n';
    }
}

void save_observed_dataset(const ObservedDataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    write_observed_dataset(out, dataset);
}

std::vector<Scenario> group_scenarios(const ObservedDataset& dataset) {
    std::vector<Scenario> scenarios;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
        const auto& row = dataset.rows[i];
        auto [it, inserted] = index.emplace(row.scenario_id, scenarios.size());
        if (inserted) {
            scenarios.push_back(Scenario{row.scenario_id, {}, {}, {}});
        }
        auto& s = scenarios[it->second];
        s.rows.push_back(i);
        (row.role == Role::leader ? s.leaders : s.agents).push_back(i);
    }
    return scenarios;
}

AgentPopulation scenario_agents(const ObservedDataset& dataset, const Scenario& scenario) {
    const auto q = static_cast<Eigen::Index>(scenario.agents.size());
    const auto p = static_cast<Eigen::Index>(scenario.leaders.size());
    std::map<std::size_t, Eigen::Index> agent_col;
    std::map<std::size_t, Eigen::Index> leader_col;
    for (Eigen::Index k = 0; k < q; ++k) {
        agent_col[scenario.agents[static_cast<std::size_t>(k)]] = k;
    }
    for (Eigen::Index k = 0; k < p; ++k) {
        leader_col[scenario.leaders[static_cast<std::size_t>(k)]] = k;
    }

    Vector x0(q), rho(q), pi(q), theta(q);
    Matrix W = Matrix::Zero(q, q);
    Matrix U = Matrix::Zero(q, p);
    for (Eigen::Index i = 0; i < q; ++i) {
        const auto& row = dataset.rows[scenario.agents[static_cast<std::size_t>(i)]];
        if (row.weights.size() != scenario.rows.size()) {
            throw DimensionMismatch("scenario '" + scenario.id + "': agent '" + row.subject_id +
                                    "' has " + std::to_string(row.weights.size()) +
                                    " weights for " + std::to_string(scenario.rows.size()) +
                                    " subjects");
        }
        double to_agents = 0.0;
        double to_leaders = 0.0;
        for (std::size_t k = 0; k < scenario.rows.size(); ++k) {
            const std::size_t subject = scenario.rows[k];
            const double w = row.weights[k];
            if (dataset.rows[subject].role == Role::agent) {
                W(i, agent_col[subject]) = w;
                to_agents += w;
            } else {
                U(i, leader_col[subject]) = w;
                to_leaders += w;
            }
        }
        if (to_agents > 0.0) {
            W.row(i) /= to_agents;
        } else {
            W(i, i) = 1.0;
        }
        if (p > 0) {
            if (to_leaders > 0.0) {
                U.row(i) /= to_leaders;
            } else {
                U.row(i).setConstant(1.0 / static_cast<double>(p));
            }
        }
        const double rest = 1.0 - row.stubbornness;
        const double total = to_agents + to_leaders;
        x0[i] = row.initial_opinion;
        rho[i] = row.stubbornness;
        theta[i] = total > 0.0 ? rest * to_leaders / total : 0.0;
        pi[i] = rest - theta[i];
    }
    return AgentPopulation(std::move(x0), std::move(rho), std::move(pi), std::move(theta),
                           std::move(W), std::move(U));
}

std::vector<PreferenceObservation> preference_observations(const ObservedDataset& dataset) {
    std::vector<PreferenceObservation> out;
    for (const auto& row : dataset.rows) {
        if (row.role != Role::leader || row.weights.empty() ||
            row.weights.size() != row.messages.size()) {
            continue;
        }
        PreferenceObservation obs;
        obs.m_prev = row.initial_opinion;
        obs.messages = Eigen::Map<const Vector>(row.messages.data(),
                                                static_cast<Eigen::Index>(row.messages.size()));
        obs.observed_weights = Eigen::Map<const Vector>(
            row.weights.data(), static_cast<Eigen::Index>(row.weights.size()));
        out.push_back(std::move(obs));
    }
    return out;
}

std::string scenario_label(const std::string& scenario_id) {
    return scenario_id.substr(0, scenario_id.find('/'));
}

}  // namespace twostep
