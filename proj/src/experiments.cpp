#include "twostep/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "twostep/errors.hpp"

namespace twostep {

namespace {

Vector draw(const BetaDistribution& dist, std::size_t k, CounterRng& rng) {
    Vector v(static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = dist.sample(rng);
    }
    return v;
}

bool scalar_regime(const ExperimentConfig& c) {
    return c.matrix_mode == MatrixMode::uniform && c.sigma.is_scalar() && c.rho.is_scalar() &&
           c.pi.is_scalar() && c.theta.is_scalar();
}

std::optional<double> mean_of(const std::vector<double>& v) {
    if (v.empty()) {
        return std::nullopt;
    }
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

Vector concat(const Vector& a, const Vector& b) {
    Vector out(a.size() + b.size());
    out << a, b;
    return out;
}

Cell optional_cell(const std::optional<double>& v) {
    return v ? Cell(*v) : Cell(std::monostate{});
}

}  // namespace

std::pair<Matrix, Matrix> generate_matrices(MatrixMode mode, std::size_t q, std::size_t p,
                                            CounterRng& rng) {
    const auto qi = static_cast<Eigen::Index>(q);
    const auto pi = static_cast<Eigen::Index>(p);
    switch (mode) {
        case MatrixMode::uniform:
            return {Matrix::Constant(qi, qi, 1.0 / static_cast<double>(q)),
                    Matrix::Constant(qi, pi, 1.0 / static_cast<double>(p))};
        case MatrixMode::random_row_normalized: {
            auto random = [&](Eigen::Index rows, Eigen::Index cols) {
                Matrix m(rows, cols);
                for (Eigen::Index r = 0; r < rows; ++r) {
                    for (Eigen::Index c = 0; c < cols; ++c) {
                        m(r, c) = 1.0 - rng.uniform();
                    }
                    m.row(r) /= m.row(r).sum();
                }
                return m;
            };
            Matrix W = random(qi, qi);
            Matrix U = random(qi, pi);
            return {std::move(W), std::move(U)};
        }
        case MatrixMode::explicit_matrices:
            break;
    }
    throw ValidationError("matrix_mode", "explicit matrices are read from the config");
}

Populations build_populations(const ExperimentConfig& config, CounterRng& rng,
                              bool randomize_entities) {
    validate(config);
    const MessageDistribution messages(config.a, config.b);
    Vector m0 = draw(BetaDistribution(config.a_m, config.b_m), config.p, rng);
    Vector x0 = draw(BetaDistribution(config.a_x, config.b_x), config.q, rng);

    Vector sigma = config.sigma.expand(config.p, "sigma");
    Vector rho = config.rho.expand(config.q, "rho");
    Vector pi = config.pi.expand(config.q, "pi");
    Vector theta = config.theta.expand(config.q, "theta");
    if (randomize_entities) {
        for (Eigen::Index i = 0; i < sigma.size(); ++i) {
            sigma[i] = rng.uniform();
        }
        for (Eigen::Index i = 0; i < rho.size(); ++i) {
            // 1 - u lies in (0, 1], so the triple never sums to zero.
            const double r = 1.0 - rng.uniform();
            const double w = 1.0 - rng.uniform();
            const double t = 1.0 - rng.uniform();
            const double total = r + w + t;
            rho[i] = r / total;
            theta[i] = t / total;
            pi[i] = 1.0 - rho[i] - theta[i];
        }
    }

    Matrix W;
    Matrix U;
    if (config.matrix_mode == MatrixMode::explicit_matrices) {
        W = *config.W;
        U = *config.U;
    } else {
        std::tie(W, U) = generate_matrices(config.matrix_mode, config.q, config.p, rng);
    }
    return Populations{messages,
                       LeaderPopulation(std::move(m0), std::move(sigma), config.alpha, config.beta),
                       AgentPopulation(std::move(x0), std::move(rho), std::move(pi),
                                       std::move(theta), std::move(W), std::move(U))};
}

RunOutcome run_replicate(const ExperimentConfig& config, std::size_t replicate,
                         bool randomize_entities) {
    CounterRng rng = CounterRng::substream(config.master_seed, replicate);
    const std::uint64_t seed = rng.key();
    Populations pops = build_populations(config, rng, randomize_entities);
    const Trajectory traj =
        simulate(pops.messages, pops.leaders, pops.agents, {config.n, config.T, false}, rng);
    TailAverage tail = tail_average(traj);
    SteadyStateResult predicted =
        predict_steady_state(pops.leaders, pops.agents, pops.messages, config.constants());
    return RunOutcome{std::move(pops), std::move(tail), std::move(predicted), seed};
}

std::optional<double> pearson(const Vector& x, const Vector& y) {
    if (x.size() != y.size()) {
        throw DimensionMismatch("pearson: lengths differ");
    }
    if (x.size() < 2) {
        return std::nullopt;
    }
    const Vector dx = x.array() - x.mean();
    const Vector dy = y.array() - y.mean();
    const double sxx = dx.squaredNorm();
    const double syy = dy.squaredNorm();
    // Relative test so that vectors constant up to rounding count as constant.
    const double scale = static_cast<double>(x.size()) * 1e-28;
    if (sxx <= scale * (1.0 + x.squaredNorm()) || syy <= scale * (1.0 + y.squaredNorm())) {
        return std::nullopt;
    }
    return std::clamp(dx.dot(dy) / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<CorrelationRow> run_correlation_experiment(const ExperimentConfig& config,
                                                       const std::vector<std::size_t>& n_values,
                                                       const CorrelationOptions& options) {
    if (options.replicates < 1) {
        throw ValidationError("replicates", "must be at least 1");
    }
    for (std::size_t n : n_values) {
        if (n < 2) {
            throw ValidationError("n", "correlation study needs n >= 2 (got " +
                                           std::to_string(n) + ")");
        }
    }
    std::vector<CorrelationRow> rows;
    for (std::size_t n : n_values) {
        ExperimentConfig cfg = config;
        cfg.n = n;
        std::vector<double> leaders;
        std::vector<double> agents;
        std::vector<double> pooled;
        for (std::size_t r = 0; r < options.replicates; ++r) {
            const RunOutcome run = run_replicate(cfg, r, options.randomize_entities);
            if (auto v = pearson(run.simulated.leaders, run.predicted.leader_ss)) {
                leaders.push_back(*v);
            }
            if (auto v = pearson(run.simulated.agents, run.predicted.agent_ss)) {
                agents.push_back(*v);
            }
            if (auto v = pearson(concat(run.simulated.leaders, run.simulated.agents),
                                 concat(run.predicted.leader_ss, run.predicted.agent_ss))) {
                pooled.push_back(*v);
            }
        }
        CorrelationRow row;
        row.n = n;
        row.replicates = options.replicates;
        row.r_leaders = mean_of(leaders);
        row.r_agents = mean_of(agents);
        row.r_pooled = mean_of(pooled);
        row.leaders_defined = leaders.size();
        row.agents_defined = agents.size();
        rows.push_back(row);
    }
    return rows;
}

ResultTable correlation_table(const std::vector<CorrelationRow>& rows) {
    ResultTable table;
    table.columns = {"n",        "replicates",      "r_leaders",     "r_agents",
                     "r_pooled", "leaders_defined", "agents_defined"};
    for (const auto& r : rows) {
        table.add({static_cast<std::int64_t>(r.n), static_cast<std::int64_t>(r.replicates),
                   optional_cell(r.r_leaders), optional_cell(r.r_agents),
                   optional_cell(r.r_pooled), static_cast<std::int64_t>(r.leaders_defined),
                   static_cast<std::int64_t>(r.agents_defined)});
    }
    return table;
}

PredictedStats predict_run_stats(const ExperimentConfig& config, const Populations& populations,
                                 const SteadyStateResult& predicted) {
    if (scalar_regime(config)) {
        ScalarRegime regime;
        regime.sigma = config.sigma.values.front();
        regime.rho = config.rho.values.front();
        regime.theta = config.theta.values.front();
        regime.alpha = config.alpha;
        regime.beta = config.beta;
        regime.mu = populations.messages.mean();
        regime.leader_initial = sample_stats(populations.leaders.initial_opinions());
        regime.agent_initial = sample_stats(populations.agents.initial_opinions());
        regime.constants = config.constants();
        return predicted_stats(regime);
    }
    return {sample_stats(predicted.leader_ss), sample_stats(predicted.agent_ss)};
}

void validate_sweep(const SweepSpec& spec) {
    const auto names = sweepable_parameters();
    if (std::find(names.begin(), names.end(), spec.parameter) == names.end()) {
        throw ValidationError(spec.parameter.empty() ? "param" : spec.parameter,
                              "is not a sweepable parameter");
    }
    if (spec.values.empty()) {
        throw ValidationError(spec.parameter, "sweep grid is empty");
    }
    if (spec.replicates < 1) {
        throw ValidationError("replicates", "must be at least 1");
    }
    validate(spec.base);
    for (double v : spec.values) {
        ExperimentConfig cfg = spec.base;
        try {
            set_parameter(cfg, spec.parameter, v);
        } catch (const ValidationError& e) {
            std::string what = e.what();
            const std::string prefix = e.field() + ": ";
            if (what.rfind(prefix, 0) == 0) {
                what.erase(0, prefix.size());
            }
            throw ValidationError(e.field(), what + " (sweep " + spec.parameter + " = " +
                                                 format_double(v) + ")");
        }
    }
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    validate_sweep(spec);
    std::vector<SweepRow> rows;
    rows.reserve(spec.values.size() * spec.replicates);
    for (double v : spec.values) {
        ExperimentConfig cfg = spec.base;
        set_parameter(cfg, spec.parameter, v);
        for (std::size_t r = 0; r < spec.replicates; ++r) {
            try {
                const RunOutcome run = run_replicate(cfg, r);
                const PredictedStats pred = predict_run_stats(cfg, run.populations, run.predicted);
                SweepRow row;
                row.parameter = spec.parameter;
                row.value = v;
                row.replicate = r;
                row.seed = run.seed;
                row.simulated_leaders = sample_stats(run.simulated.leaders);
                row.simulated_agents = sample_stats(run.simulated.agents);
                row.predicted_leaders = pred.leaders;
                row.predicted_agents = pred.agents;
                rows.push_back(row);
            } catch (const ValidationError&) {
                throw;
            } catch (const Error& e) {
                throw Error("sweep " + spec.parameter + " = " + format_double(v) + ", replicate " +
                            std::to_string(r) + ": " + e.what());
            }
        }
    }
    return rows;
}

ResultTable sweep_table(const std::vector<SweepRow>& rows) {
    ResultTable table;
    table.columns = {"param",
                     "value",
                     "replicate",
                     "seed",
                     "sim_leader_mean",
                     "sim_leader_var",
                     "sim_agent_mean",
                     "sim_agent_var",
                     "pred_leader_mean",
                     "pred_leader_var",
                     "pred_agent_mean",
                     "pred_agent_var"};
    for (const auto& r : rows) {
        table.add({r.parameter, r.value, static_cast<std::int64_t>(r.replicate),
                   std::to_string(r.seed), r.simulated_leaders.mean,
                   r.simulated_leaders.variance, r.simulated_agents.mean,
                   r.simulated_agents.variance, r.predicted_leaders.mean,
                   r.predicted_leaders.variance, r.predicted_agents.mean,
                   r.predicted_agents.variance});
    }
    return table;
}

}  // namespace twostep
