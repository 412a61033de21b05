#include "twostep/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "twostep/calibration.hpp"
#include "twostep/errors.hpp"
#include "twostep/steady_state.hpp"

namespace twostep {

namespace {

double param(const BaselineSpec& spec, const std::string& name) {
    const auto it = spec.params.find(name);
    if (it == spec.params.end()) {
        throw ValidationError(name, "missing parameter for " + std::string(to_string(spec.kind)));
    }
    return it->second;
}

double csn_attraction(BaselineKind kind, double d) {
    switch (kind) {
        case BaselineKind::CSN_linear:
            return 1.0 - d;
        case BaselineKind::CSN_log:
            return std::log1p((std::numbers::e - 1.0) * (1.0 - d));
        case BaselineKind::CSN_sine:
            return std::sin(0.5 * std::numbers::pi * (1.0 - d));
        default:
            return 0.0;
    }
}

// Aggregate A(m, s) of one leader.
double aggregate(const BaselineSpec& spec, double m, const Vector& s, CounterRng& rng) {
    const auto n = s.size();
    switch (spec.kind) {
        case BaselineKind::HK: {
            const double eps = param(spec, "epsilon");
            double total = 0.0;
            Eigen::Index count = 0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (std::abs(m - s[j]) <= eps) {
                    total += s[j];
                    ++count;
                }
            }
            return count > 0 ? total / static_cast<double>(count) : m;
        }
        case BaselineKind::SBC: {
            const double eps = param(spec, "epsilon");
            const double k = param(spec, "steepness");
            double total = 0.0;
            Eigen::Index count = 0;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double keep = 1.0 / (1.0 + std::pow(std::abs(m - s[j]) / eps, k));
                if (rng.uniform() < keep) {
                    total += s[j];
                    ++count;
                }
            }
            return count > 0 ? total / static_cast<double>(count) : m;
        }
        case BaselineKind::BOF: {
            const double b = param(spec, "bias");
            const double mean = n > 0 ? s.mean() : m;
            const double toward = std::pow(m, b) * mean;
            const double away = std::pow(1.0 - m, b) * (1.0 - mean);
            const double den = toward + away;
            return den > 0.0 ? toward / den : m;
        }
        case BaselineKind::CSN_linear:
        case BaselineKind::CSN_log:
        case BaselineKind::CSN_sine: {
            const double rate = param(spec, "rate");
            if (n == 0) {
                return m;
            }
            double pull = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                pull += csn_attraction(spec.kind, std::abs(m - s[j])) * (s[j] - m);
            }
            return m + rate * pull / static_cast<double>(n);
        }
    }
    throw ValidationError("kind", "unknown baseline kind");
}

template <typename T>
double rmse_impl(const T& pred, const T& obs, std::size_t k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double d = pred[static_cast<Eigen::Index>(i)] - obs[static_cast<Eigen::Index>(i)];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(k));
}

bool is_stochastic(BaselineKind kind) { return kind == BaselineKind::SBC; }

}  // namespace

std::string_view to_string(BaselineKind kind) noexcept {
    switch (kind) {
        case BaselineKind::HK:
            return "HK";
        case BaselineKind::BOF:
            return "BOF";
        case BaselineKind::SBC:
            return "SBC";
        case BaselineKind::CSN_linear:
            return "CSN_linear";
        case BaselineKind::CSN_log:
            return "CSN_log";
        case BaselineKind::CSN_sine:
            return "CSN_sine";
    }
    return "unknown";
}

BaselineKind parse_baseline_kind(std::string_view name) {
    for (auto kind : kAllBaselines) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw ValidationError("kind", "unknown baseline '" + std::string(name) + "'");
}

std::vector<std::string> required_parameters(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::HK:
            return {"epsilon"};
        case BaselineKind::BOF:
            return {"bias"};
        case BaselineKind::SBC:
            return {"epsilon", "steepness"};
        default:
            return {"rate"};
    }
}

void validate(const BaselineSpec& spec) {
    for (const auto& name : required_parameters(spec.kind)) {
        const double v = param(spec, name);
        if (!std::isfinite(v)) {
            throw ValidationError(name, "must be finite");
        }
        if (name == "epsilon" && !(v > 0.0 && v <= 1.0)) {
            throw ValidationError(name, "must lie in (0, 1]");
        }
        if (name == "bias" && !(v >= 0.0)) {
            throw ValidationError(name, "must be nonnegative");
        }
        if (name == "steepness" && !(v > 0.0)) {
            throw ValidationError(name, "must be positive");
        }
        if (name == "rate" && !(v >= 0.0 && v <= 1.0)) {
            throw ValidationError(name, "must lie in [0, 1]");
        }
    }
}

Vector baseline_leader_step(const BaselineSpec& spec, const Vector& m_prev, const Vector& messages,
                            const LeaderPopulation& leaders, CounterRng& rng) {
    validate(spec);
    if (m_prev.size() != static_cast<Eigen::Index>(leaders.size())) {
        throw DimensionMismatch("baseline_leader_step: m_prev has length " +
                                std::to_string(m_prev.size()) + ", expected " +
                                std::to_string(leaders.size()));
    }
    const auto& sigma = leaders.stubbornness();
    const auto& m0 = leaders.initial_opinions();
    Vector out(m_prev.size());
    for (Eigen::Index i = 0; i < m_prev.size(); ++i) {
        const double a = aggregate(spec, m_prev[i], messages, rng);
        out[i] = std::clamp(sigma[i] * m0[i] + (1.0 - sigma[i]) * a, 0.0, 1.0);
    }
    return out;
}

MessageSource MessageSource::sampled(const MessageDistribution& dist, std::size_t count) {
    MessageSource src;
    src.dist_ = dist;
    src.count_ = count;
    return src;
}

MessageSource MessageSource::fixed(Vector messages) {
    MessageSource src;
    src.fixed_ = std::move(messages);
    return src;
}

Vector MessageSource::next(CounterRng& rng) const {
    if (dist_) {
        return sample_messages(*dist_, count_, rng);
    }
    return fixed_;
}

LeaderUpdate baseline_update(const BaselineSpec& spec) {
    validate(spec);
    return [spec](const LeaderPopulation& leaders, const Vector& m_prev, const Vector& s,
                  CounterRng& rng) { return baseline_leader_step(spec, m_prev, s, leaders, rng); };
}

LeaderUpdate selective_update() {
    return [](const LeaderPopulation& leaders, const Vector& m_prev, const Vector& s,
              CounterRng&) { return leader_step(leaders, m_prev, s); };
}

Vector predict_leader_ss(const LeaderUpdate& update, const LeaderPopulation& leaders,
                         const MessageSource& source, std::size_t T, std::uint64_t master_seed,
                         std::size_t n_runs, std::size_t window) {
    if (T < 1) {
        throw ValidationError("T", "must be at least 1");
    }
    if (n_runs < 1) {
        throw ValidationError("n_runs", "must be at least 1");
    }
    window = std::clamp<std::size_t>(window, 1, T);
    const auto p = static_cast<Eigen::Index>(leaders.size());
    Vector total = Vector::Zero(p);
    for (std::size_t r = 0; r < n_runs; ++r) {
        CounterRng rng = CounterRng::substream(master_seed, r);
        Vector m = leaders.initial_opinions();
        Vector tail = Vector::Zero(p);
        for (std::size_t t = 1; t <= T; ++t) {
            const Vector s = source.next(rng);
            m = update(leaders, m, s, rng);
            if (t > T - window) {
                tail += m;
            }
        }
        total += tail / static_cast<double>(window);
    }
    total /= static_cast<double>(n_runs);
    return total.unaryExpr([](double v) { return std::clamp(v, 0.0, 1.0); });
}

Vector baseline_predict_ss(const BaselineSpec& spec, const LeaderPopulation& leaders,
                           const MessageSource& source, std::size_t T, std::uint64_t master_seed,
                           std::size_t n_runs) {
    return predict_leader_ss(baseline_update(spec), leaders, source, T, master_seed, n_runs);
}

double rmse(const Vector& pred, const Vector& obs) {
    if (pred.size() != obs.size() || pred.size() == 0) {
        throw DimensionMismatch("rmse: lengths " + std::to_string(pred.size()) + " and " +
                                std::to_string(obs.size()) + " must be equal and nonzero");
    }
    return rmse_impl(pred, obs, static_cast<std::size_t>(pred.size()));
}

double rmse(const std::vector<double>& pred, const std::vector<double>& obs) {
    if (pred.size() != obs.size() || pred.empty()) {
        throw DimensionMismatch("rmse: lengths " + std::to_string(pred.size()) + " and " +
                                std::to_string(obs.size()) + " must be equal and nonzero");
    }
    return rmse_impl(pred, obs, pred.size());
}

std::vector<BaselineSpec> default_parameter_grid(BaselineKind kind) {
    std::vector<BaselineSpec> grid;
    switch (kind) {
        case BaselineKind::HK:
            for (int i = 1; i <= 20; ++i) {
                grid.push_back({kind, {{"epsilon", 0.05 * i}}});
            }
            break;
        case BaselineKind::BOF:
            for (int i = 0; i <= 16; ++i) {
                grid.push_back({kind, {{"bias", 0.25 * i}}});
            }
            break;
        case BaselineKind::SBC:
            for (int i = 1; i <= 20; ++i) {
                for (double k : {1.0, 2.0, 4.0, 8.0, 16.0}) {
                    grid.push_back({kind, {{"epsilon", 0.05 * i}, {"steepness", k}}});
                }
            }
            break;
        default:
            for (int i = 0; i <= 20; ++i) {
                grid.push_back({kind, {{"rate", 0.05 * i}}});
            }
            break;
    }
    return grid;
}

namespace {

// Leader predictions of one rule for every leader row of the dataset,
// indexed by row.
std::vector<double> predict_leader_rows(const ObservedDataset& dataset,
                                        const std::vector<std::size_t>& rows,
                                        const LeaderUpdate& update, double alpha, double beta,
                                        const CompareOptions& options, std::size_t n_runs) {
    std::vector<double> out(dataset.rows.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t idx : rows) {
        const auto& row = dataset.rows[idx];
        const LeaderPopulation leader(Vector::Constant(1, row.initial_opinion),
                                      Vector::Constant(1, row.stubbornness), alpha, beta);
        const Vector shown = Eigen::Map<const Vector>(
            row.messages.data(), static_cast<Eigen::Index>(row.messages.size()));
        const std::uint64_t seed = CounterRng::substream(options.seed, idx).key();
        out[idx] = predict_leader_ss(update, leader, MessageSource::fixed(shown), options.steps,
                                     seed, n_runs)[0];
    }
    return out;
}

double leader_rmse(const ObservedDataset& dataset, const std::vector<std::size_t>& rows,
                   const std::vector<double>& pred) {
    std::vector<double> p;
    std::vector<double> o;
    for (std::size_t idx : rows) {
        p.push_back(pred[idx]);
        o.push_back(dataset.rows[idx].final_opinion);
    }
    return rmse(p, o);
}

BaselineSpec fit_baseline(const ObservedDataset& dataset, const std::vector<std::size_t>& rows,
                          BaselineKind kind, const CompareOptions& options) {
    const std::size_t runs = is_stochastic(kind) ? options.n_runs : 1;
    BaselineSpec best;
    double best_err = std::numeric_limits<double>::infinity();
    for (const auto& spec : default_parameter_grid(kind)) {
        const auto pred = predict_leader_rows(dataset, rows, baseline_update(spec), 1.0, 1.0,
                                              options, runs);
        const double err = leader_rmse(dataset, rows, pred);
        if (err < best_err) {
            best_err = err;
            best = spec;
        }
    }
    return best;
}

}  // namespace

ComparisonReport compare_models(const ObservedDataset& dataset, const CompareOptions& options) {
    validate_dataset(dataset);
    if (options.steps < 1) {
        throw ValidationError("steps", "must be at least 1");
    }
    const auto scenarios = group_scenarios(dataset);

    ComparisonReport report;
    report.alpha = options.alpha;
    report.beta = options.beta;
    if (options.estimate_preferences) {
        const auto observations = preference_observations(dataset);
        if (!observations.empty()) {
            const auto est = estimate_preference_coeffs(observations);
            report.alpha = est.alpha;
            report.beta = est.beta;
        }
    }
    validate_preference(report.alpha, report.beta);

    std::vector<std::string> labels;
    std::map<std::string, std::vector<std::size_t>> label_leaders;
    std::vector<std::size_t> all_leaders;
    for (const auto& s : scenarios) {
        const std::string label = scenario_label(s.id);
        if (label_leaders.find(label) == label_leaders.end()) {
            labels.push_back(label);
        }
        auto& bucket = label_leaders[label];
        bucket.insert(bucket.end(), s.leaders.begin(), s.leaders.end());
        all_leaders.insert(all_leaders.end(), s.leaders.begin(), s.leaders.end());
    }

    // Leader predictions per model, indexed by dataset row.
    std::vector<std::vector<double>> leader_pred;
    for (auto kind : options.baselines) {
        report.models.emplace_back(to_string(kind));
        const std::size_t runs = is_stochastic(kind) ? options.n_runs : 1;
        if (!options.fit_per_scenario || all_leaders.empty()) {
            const BaselineSpec spec = all_leaders.empty()
                                          ? default_parameter_grid(kind).front()
                                          : fit_baseline(dataset, all_leaders, kind, options);
            report.fitted.push_back(spec);
            leader_pred.push_back(predict_leader_rows(dataset, all_leaders, baseline_update(spec),
                                                      1.0, 1.0, options, runs));
            continue;
        }
        std::vector<double> pred(dataset.rows.size(), std::numeric_limits<double>::quiet_NaN());
        for (const auto& label : labels) {
            const auto& rows = label_leaders[label];
            if (rows.empty()) {
                continue;
            }
            const BaselineSpec spec = fit_baseline(dataset, rows, kind, options);
            const auto part = predict_leader_rows(dataset, rows, baseline_update(spec), 1.0, 1.0,
                                                  options, runs);
            for (std::size_t idx : rows) {
                pred[idx] = part[idx];
            }
        }
        report.fitted.push_back(fit_baseline(dataset, all_leaders, kind, options));
        leader_pred.push_back(std::move(pred));
    }
    report.models.emplace_back("MP");
    leader_pred.push_back(predict_leader_rows(dataset, all_leaders, selective_update(),
                                              report.alpha, report.beta, options, 1));

    // Agent predictions per model from the linear steady state of each scenario.
    const std::size_t models = report.models.size();
    std::vector<std::vector<double>> agent_pred(
        models, std::vector<double>(dataset.rows.size(), std::numeric_limits<double>::quiet_NaN()));
    for (const auto& s : scenarios) {
        if (s.agents.empty()) {
            continue;
        }
        const AgentPopulation agents = scenario_agents(dataset, s);
        for (std::size_t m = 0; m < models; ++m) {
            Vector leaders(static_cast<Eigen::Index>(s.leaders.size()));
            for (std::size_t k = 0; k < s.leaders.size(); ++k) {
                leaders[static_cast<Eigen::Index>(k)] = leader_pred[m][s.leaders[k]];
            }
            const Vector x = agent_ss(agents, leaders);
            for (std::size_t k = 0; k < s.agents.size(); ++k) {
                agent_pred[m][s.agents[k]] = x[static_cast<Eigen::Index>(k)];
            }
        }
    }

    auto make_row = [&](const std::string& name, const std::vector<std::size_t>& rows) {
        ComparisonRow out;
        out.scenario = name;
        std::vector<std::size_t> leader_rows;
        std::vector<std::size_t> agent_rows;
        for (std::size_t idx : rows) {
            (dataset.rows[idx].role == Role::leader ? leader_rows : agent_rows).push_back(idx);
        }
        out.leader_count = leader_rows.size();
        out.agent_count = agent_rows.size();
        for (std::size_t m = 0; m < models; ++m) {
            auto cell = [&](const std::vector<std::size_t>& subset,
                            const std::vector<double>& pred) {
                if (subset.empty()) {
                    return std::numeric_limits<double>::quiet_NaN();
                }
                std::vector<double> p;
                std::vector<double> o;
                for (std::size_t idx : subset) {
                    p.push_back(pred[idx]);
                    o.push_back(dataset.rows[idx].final_opinion);
                }
                return rmse(p, o);
            };
            out.leader_rmse.push_back(cell(leader_rows, leader_pred[m]));
            out.agent_rmse.push_back(cell(agent_rows, agent_pred[m]));
        }
        return out;
    };

    std::map<std::string, std::vector<std::size_t>> label_rows;
    std::vector<std::size_t> all_rows;
    for (const auto& s : scenarios) {
        auto& bucket = label_rows[scenario_label(s.id)];
        bucket.insert(bucket.end(), s.rows.begin(), s.rows.end());
        all_rows.insert(all_rows.end(), s.rows.begin(), s.rows.end());
    }
    for (const auto& label : labels) {
        report.rows.push_back(make_row(label, label_rows[label]));
    }
    report.rows.push_back(make_row("Overall", all_rows));
    return report;
}

ObservedDataset generate_mp_dataset(const SyntheticDatasetOptions& options) {
    validate_preference(options.alpha, options.beta);
    if (options.scenarios == 0 || options.groups == 0 || options.leaders == 0 ||
        options.messages < 2) {
        throw ValidationError("scenarios", "synthetic dataset needs scenarios, groups, leaders "
                                           "and at least two messages");
    }
    // Message laws cycled over scenario labels.
    static const std::array<std::pair<double, double>, 6> kLaws{
        {{1.0, 1.0}, {2.0, 5.0}, {5.0, 2.0}, {2.0, 2.0}, {0.7, 0.7}, {3.0, 1.5}}};

    ObservedDataset dataset;
    for (std::size_t k = 0; k < options.scenarios; ++k) {
        const auto [a, b] = kLaws[k % kLaws.size()];
        const MessageDistribution dist(a, b);
        for (std::size_t g = 0; g < options.groups; ++g) {
            CounterRng rng = CounterRng::substream(options.seed, k * options.groups + g);
            std::normal_distribution<double> noise(0.0, options.noise > 0.0 ? options.noise : 1.0);
            auto perturb = [&](double v) {
                return options.noise > 0.0 ? std::clamp(v + noise(rng), 0.0, 1.0) : v;
            };
            const std::string id = "S" + std::to_string(k + 1) + "/g" + std::to_string(g + 1);
            const std::size_t first = dataset.rows.size();

            Vector leader_final(static_cast<Eigen::Index>(options.leaders));
            for (std::size_t i = 0; i < options.leaders; ++i) {
                ObservedRow row;
                row.scenario_id = id;
                row.subject_id = "L" + std::to_string(i + 1);
                row.role = Role::leader;
                row.initial_opinion = rng.uniform();
                row.stubbornness = 0.1 + 0.8 * rng.uniform();
                const Vector shown = sample_messages(dist, options.messages, rng);
                const Vector gamma = selective_coefficients(row.initial_opinion, shown,
                                                            options.alpha, options.beta);
                row.messages.assign(shown.data(), shown.data() + shown.size());
                row.weights.assign(gamma.data(), gamma.data() + gamma.size());
                const LeaderPopulation leader(Vector::Constant(1, row.initial_opinion),
                                              Vector::Constant(1, row.stubbornness),
                                              options.alpha, options.beta);
                leader_final[static_cast<Eigen::Index>(i)] =
                    predict_leader_ss(selective_update(), leader, MessageSource::fixed(shown),
                                      options.steps, 0, 1)[0];
                dataset.rows.push_back(std::move(row));
            }
            const std::size_t subjects = options.leaders + options.agents;
            for (std::size_t i = 0; i < options.agents; ++i) {
                ObservedRow row;
                row.scenario_id = id;
                row.subject_id = "A" + std::to_string(i + 1);
                row.role = Role::agent;
                row.initial_opinion = rng.uniform();
                row.stubbornness = 0.1 + 0.5 * rng.uniform();
                row.weights.resize(subjects);
                double total = 0.0;
                for (auto& w : row.weights) {
                    w = 0.05 + rng.uniform();
                    total += w;
                }
                for (auto& w : row.weights) {
                    w /= total;
                }
                dataset.rows.push_back(std::move(row));
            }

            Scenario scenario{id, {}, {}, {}};
            for (std::size_t r = first; r < dataset.rows.size(); ++r) {
                scenario.rows.push_back(r);
                (dataset.rows[r].role == Role::leader ? scenario.leaders : scenario.agents)
                    .push_back(r);
            }
            for (std::size_t i = 0; i < options.leaders; ++i) {
                dataset.rows[first + i].final_opinion =
                    perturb(leader_final[static_cast<Eigen::Index>(i)]);
            }
            if (options.agents > 0) {
                const Vector x = agent_ss(scenario_agents(dataset, scenario), leader_final);
                for (std::size_t i = 0; i < options.agents; ++i) {
                    dataset.rows[first + options.leaders + i].final_opinion =
                        perturb(x[static_cast<Eigen::Index>(i)]);
                }
            }
        }
    }
    validate_dataset(dataset);
    return dataset;
}

}  // namespace twostep
