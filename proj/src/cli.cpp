#include "twostep/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twostep/baselines.hpp"
#include "twostep/calibration.hpp"
#include "twostep/config.hpp"
#include "twostep/dataset.hpp"
#include "twostep/errors.hpp"
#include "twostep/experiments.hpp"
#include "twostep/results.hpp"
#include "twostep/steady_state.hpp"

namespace twostep {

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::string format;
    bool desk = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_config) {
    if (with_config) {
        cmd->add_option("--config", o.config_path, "Experiment config (JSON)")
            ->check(CLI::ExistingFile);
        cmd->add_flag("--desk", o.desk, "Desk scale: n = 1000, p = q = 200");
    }
    cmd->add_option("--seed", o.seed, "Master seed (overrides config and TWOSTEP_SEED)");
    cmd->add_option("--out", o.out_path, "Output file (default: stdout)");
    cmd->add_option("--format", o.format, "csv or json (default: from --out extension)")
        ->check(CLI::IsMember({"csv", "json"}));
}

std::uint64_t env_seed() {
    const char* raw = std::getenv("TWOSTEP_SEED");
    if (raw == nullptr || *raw == '\0') {
        return 0;
    }
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(raw, &used);
        if (used != std::string(raw).size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ValidationError("TWOSTEP_SEED", "must be an unsigned integer");
    }
}

// --seed, then an explicit master_seed in the config, then TWOSTEP_SEED.
ExperimentConfig resolve_config(const CommonOptions& o) {
    ExperimentConfig config;
    bool config_seed = false;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        config = parse_config(buf.str());
        config_seed = config_sets_seed(buf.str());
    }
    if (o.desk) {
        config.n = 1000;
        config.p = 200;
        config.q = 200;
        validate(config);
    }
    if (o.seed) {
        config.master_seed = *o.seed;
    } else if (!config_seed) {
        config.master_seed = env_seed();
    }
    return config;
}

std::uint64_t resolve_seed(const CommonOptions& o) { return o.seed ? *o.seed : env_seed(); }

OutputFormat resolve_format(const CommonOptions& o) {
    if (!o.format.empty()) {
        return parse_format(o.format);
    }
    return format_for_path(o.out_path);
}

void emit(const ResultTable& table, const CommonOptions& o, std::ostream& out) {
    const OutputFormat format = resolve_format(o);
    if (o.out_path.empty()) {
        write_results(out, table, format);
    } else {
        save_results(table, o.out_path, format);
    }
}

void emit_text(const std::string& text, const CommonOptions& o, std::ostream& out) {
    if (o.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(o.out_path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw Error("cannot write '" + o.out_path + "'");
    }
    file << text;
}

ResultTable trajectory_table(const Trajectory& traj) {
    ResultTable table;
    table.columns = {"t", "role", "index", "opinion"};
    for (std::size_t t = 0; t < traj.leader_opinions.size(); ++t) {
        const auto ti = static_cast<std::int64_t>(t);
        const Vector& m = traj.leader_opinions[t];
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            table.add({ti, std::string("leader"), static_cast<std::int64_t>(i), m[i]});
        }
        const Vector& x = traj.agent_opinions[t];
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            table.add({ti, std::string("agent"), static_cast<std::int64_t>(i), x[i]});
        }
    }
    return table;
}

std::string fit_json(const FitResult& fit) {
    nlohmann::ordered_json doc;
    doc["lambda"] = fit.lambda;
    doc["kappa"] = fit.kappa;
    doc["rms_residual"] = fit.rms_residual;
    doc["residuals"] = fit.per_point_residuals;
    auto law = [](const LawFit& l, const char* grid_name) {
        nlohmann::ordered_json j;
        j["constant"] = l.constant;
        j[grid_name] = l.grid;
        j["w"] = l.w;
        j["residuals"] = l.residuals;
        j["rms_residual"] = l.rms_residual;
        return j;
    };
    doc["kappa_law"] = law(fit.kappa_law, "beta");
    doc["lambda_law"] = law(fit.lambda_law, "alpha");
    return doc.dump(2) + "\n";
}

ResultTable fit_table(const FitResult& fit) {
    ResultTable table;
    table.columns = {"law", "x", "w", "residual", "lambda", "kappa", "rms_residual"};
    auto add_law = [&](const LawFit& l, const char* name) {
        for (std::size_t i = 0; i < l.grid.size(); ++i) {
            table.add({std::string(name), l.grid[i], l.w[i], l.residuals[i], fit.lambda, fit.kappa,
                       fit.rms_residual});
        }
    };
    add_law(fit.kappa_law, "kappa");
    add_law(fit.lambda_law, "lambda");
    return table;
}

ResultTable comparison_table(const ComparisonReport& report) {
    ResultTable table;
    table.columns.push_back("scenario");
    for (const auto& m : report.models) {
        table.columns.push_back("leader_" + m);
    }
    for (const auto& m : report.models) {
        table.columns.push_back("agent_" + m);
    }
    for (const auto& row : report.rows) {
        std::vector<Cell> cells{row.scenario};
        for (double v : row.leader_rmse) {
            cells.emplace_back(v);
        }
        for (double v : row.agent_rmse) {
            cells.emplace_back(v);
        }
        table.add(std::move(cells));
    }
    return table;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-step opinion dynamics: simulation, steady states, calibration and "
                 "model comparison",
                 "twostep"};
    app.require_subcommand(1);

    CommonOptions sim_o, pred_o, sweep_o, corr_o, fit_o, est_o, cmp_o, syn_o;

    auto* simulate_cmd = app.add_subcommand("simulate", "Run one trajectory and write it in long form");
    add_common(simulate_cmd, sim_o, true);

    auto* predict_cmd = app.add_subcommand("predict", "Analytic steady state of one drawn population");
    add_common(predict_cmd, pred_o, true);
    std::string method = "analytic";
    predict_cmd->add_option("--method", method, "analytic or fixed_point")
        ->check(CLI::IsMember({"analytic", "fixed_point"}));

    auto* sweep_cmd = app.add_subcommand("sweep", "Vary one parameter over a grid");
    add_common(sweep_cmd, sweep_o, true);
    std::string sweep_param;
    std::vector<double> sweep_values;
    std::size_t sweep_reps = 1;
    sweep_cmd->add_option("--param", sweep_param, "Parameter to vary")->required();
    sweep_cmd->add_option("--values", sweep_values, "Comma-separated grid")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--replicates", sweep_reps, "Replicates per grid value");

    auto* correlate_cmd =
        app.add_subcommand("correlate", "Correlation of simulated and predicted steady states");
    add_common(correlate_cmd, corr_o, true);
    std::vector<std::size_t> n_values{3, 10, 30, 100, 300, 1000};
    std::size_t corr_reps = 5;
    bool fixed_entities = false;
    correlate_cmd->add_option("--n-values", n_values, "Comma-separated message counts")
        ->delimiter(',');
    correlate_cmd->add_option("--replicates", corr_reps, "Seeds averaged per n");
    correlate_cmd->add_flag("--fixed-entities", fixed_entities,
                            "Use the config's sigma, rho, pi, theta instead of random ones");

    auto* fit_cmd = app.add_subcommand("fit-constants", "Refit lambda and kappa against the oracle");
    add_common(fit_cmd, fit_o, false);
    double fit_a = 1.0;
    double fit_b = 1.0;
    double beta_ref = 2.0;
    fit_cmd->add_option("--a", fit_a, "Message law Beta(a, b)");
    fit_cmd->add_option("--b", fit_b, "Message law Beta(a, b)");
    fit_cmd->add_option("--beta-ref", beta_ref, "beta at which the alpha law is measured");

    auto* estimate_cmd =
        app.add_subcommand("estimate-prefs", "Estimate (alpha, beta) from observed weights");
    add_common(estimate_cmd, est_o, false);
    std::string est_data;
    estimate_cmd->add_option("--data", est_data, "Observed dataset CSV")->required();

    auto* compare_cmd = app.add_subcommand("compare", "RMSE comparison against the baselines");
    add_common(compare_cmd, cmp_o, false);
    std::string cmp_data;
    std::optional<double> cmp_alpha;
    std::optional<double> cmp_beta;
    bool per_scenario = false;
    std::size_t cmp_runs = 8;
    compare_cmd->add_option("--data", cmp_data, "Observed dataset CSV")->required();
    compare_cmd->add_option("--alpha", cmp_alpha, "Fix alpha instead of estimating it");
    compare_cmd->add_option("--beta", cmp_beta, "Fix beta instead of estimating it");
    compare_cmd->add_flag("--per-scenario", per_scenario, "Fit baseline parameters per scenario");
    compare_cmd->add_option("--n-runs", cmp_runs, "Runs averaged for stochastic baselines");

    auto* synth_cmd =
        app.add_subcommand("make-dataset", "Write a synthetic observed dataset from the model");
    add_common(synth_cmd, syn_o, false);
    SyntheticDatasetOptions synth;
    synth_cmd->add_option("--alpha", synth.alpha);
    synth_cmd->add_option("--beta", synth.beta);
    synth_cmd->add_option("--noise", synth.noise, "Std. dev. of noise on final opinions");
    synth_cmd->add_option("--groups", synth.groups, "Groups per scenario label");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*simulate_cmd) {
            const ExperimentConfig config = resolve_config(sim_o);
            CounterRng rng = CounterRng::substream(config.master_seed, 0);
            const Populations pops = build_populations(config, rng);
            const Trajectory traj =
                simulate(pops.messages, pops.leaders, pops.agents, {config.n, config.T, false}, rng);
            emit(trajectory_table(traj), sim_o, out);
        } else if (*predict_cmd) {
            const ExperimentConfig config = resolve_config(pred_o);
            CounterRng rng = CounterRng::substream(config.master_seed, 0);
            const Populations pops = build_populations(config, rng);
            SteadyStateResult result =
                predict_steady_state(pops.leaders, pops.agents, pops.messages, config.constants());
            if (method == "fixed_point") {
                result.leader_ss = leader_ss_fixed_point(pops.leaders, pops.messages);
                result.agent_ss = agent_ss(pops.agents, result.leader_ss);
                result.method = SteadyStateMethod::fixed_point;
                result.constants_used.reset();
            }
            ResultTable table;
            table.columns = {"role", "index", "initial_opinion", "stubbornness", "predicted",
                             "method"};
            const std::string m(to_string(result.method));
            for (Eigen::Index i = 0; i < result.leader_ss.size(); ++i) {
                table.add({std::string("leader"), static_cast<std::int64_t>(i),
                           pops.leaders.initial_opinions()[i], pops.leaders.stubbornness()[i],
                           result.leader_ss[i], m});
            }
            for (Eigen::Index i = 0; i < result.agent_ss.size(); ++i) {
                table.add({std::string("agent"), static_cast<std::int64_t>(i),
                           pops.agents.initial_opinions()[i], pops.agents.rho()[i],
                           result.agent_ss[i], m});
            }
            emit(table, pred_o, out);
        } else if (*sweep_cmd) {
            SweepSpec spec;
            spec.base = resolve_config(sweep_o);
            spec.parameter = sweep_param;
            spec.values = sweep_values;
            spec.replicates = sweep_reps;
            emit(sweep_table(run_sweep(spec)), sweep_o, out);
        } else if (*correlate_cmd) {
            const ExperimentConfig config = resolve_config(corr_o);
            CorrelationOptions opts;
            opts.replicates = corr_reps;
            opts.randomize_entities = !fixed_entities;
            emit(correlation_table(run_correlation_experiment(config, n_values, opts)), corr_o,
                 out);
        } else if (*fit_cmd) {
            ConstantsFitOptions opts;
            opts.beta_ref = beta_ref;
            const FitResult fit = fit_constants(MessageDistribution(fit_a, fit_b), opts);
            if (resolve_format(fit_o) == OutputFormat::json) {
                emit_text(fit_json(fit), fit_o, out);
            } else {
                emit(fit_table(fit), fit_o, out);
            }
        } else if (*estimate_cmd) {
            const ObservedDataset data = load_observed_dataset(est_data);
            const PreferenceEstimate est = estimate_preference_coeffs(preference_observations(data));
            ResultTable table;
            table.columns = {"alpha", "beta", "objective", "grid_objective", "used", "excluded"};
            table.add({est.alpha, est.beta, est.objective, est.grid_objective,
                       static_cast<std::int64_t>(est.used), static_cast<std::int64_t>(est.excluded)});
            emit(table, est_o, out);
        } else if (*compare_cmd) {
            const ObservedDataset data = load_observed_dataset(cmp_data);
            CompareOptions opts;
            opts.seed = resolve_seed(cmp_o);
            opts.fit_per_scenario = per_scenario;
            opts.n_runs = cmp_runs;
            if (cmp_alpha || cmp_beta) {
                opts.estimate_preferences = false;
                opts.alpha = cmp_alpha.value_or(opts.alpha);
                opts.beta = cmp_beta.value_or(opts.beta);
            }
            emit(comparison_table(compare_models(data, opts)), cmp_o, out);
        } else if (*synth_cmd) {
            synth.seed = resolve_seed(syn_o);
            std::ostringstream text;
            write_observed_dataset(text, generate_mp_dataset(synth));
            emit_text(text.str(), syn_o, out);
        }
    } catch (const DatasetError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace twostep
