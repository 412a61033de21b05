// Acceptance suite. Every criterion runs at its pinned tolerance and prints
// one PASS/FAIL line; the exit status is nonzero when any criterion fails.
// `--only <name>` runs a single criterion (ctest registers one entry each).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "properties.hpp"
#include "support.hpp"
#include "twostep/baselines.hpp"
#include "twostep/calibration.hpp"
#include "twostep/config.hpp"
#include "twostep/experiments.hpp"
#include "twostep/steady_state.hpp"

using namespace twostep;

namespace {

// Pinned thresholds.
constexpr double kCorrSmallN = 0.96;
constexpr double kCorrLargeN = 0.99;
constexpr double kCorrRuntimeSeconds = 60.0;
constexpr double kLambdaLo = 1.05;
constexpr double kLambdaHi = 1.25;
constexpr double kKappaLo = 0.13;
constexpr double kKappaHi = 0.23;
constexpr double kCalibrationRuntimeSeconds = 300.0;
constexpr double kScalarExactTol = 1e-12;
constexpr double kScalarSimTol = 0.02;
constexpr double kMuLinearityTol = 0.02;
constexpr double kRhoVarianceRelTol = 0.10;
constexpr double kOracleTol = 0.05;
constexpr double kResidualTol = 1e-10;
constexpr double kEstimatorNoiselessTol = 0.02;
constexpr double kEstimatorNoisyTol = 0.1;
constexpr double kEstimatorNoise = 0.01;
constexpr std::size_t kEstimatorSeeds = 20;
constexpr std::size_t kInvariantCases = 10000;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, format, a);
    return buf;
}

ExperimentConfig desk() {
    ExperimentConfig c;
    c.n = 1000;
    c.p = 200;
    c.q = 200;
    c.T = 100;
    c.master_seed = 2024;
    return c;
}

Outcome correlation(std::size_t n, double threshold) {
    ExperimentConfig cfg = desk();
    const auto start = Clock::now();
    const auto rows = run_correlation_experiment(cfg, {n}, {5, true});
    const double elapsed = seconds_since(start);
    const auto& r = rows.front();
    const double rl = r.r_leaders.value_or(std::nan(""));
    const double ra = r.r_agents.value_or(std::nan(""));
    std::ostringstream d;
    d << "n=" << n << " r_leaders=" << fmt("%.5f", rl) << " r_agents=" << fmt("%.5f", ra)
      << " (threshold " << threshold << ", 5 seeds) runtime=" << fmt("%.1f", elapsed) << "s";
    return {rl >= threshold && ra >= threshold && r.leaders_defined == 5 &&
                r.agents_defined == 5 && elapsed < kCorrRuntimeSeconds,
            d.str()};
}

Outcome calibration_constants() {
    const auto start = Clock::now();
    const auto fit = fit_constants(MessageDistribution(1.0, 1.0));
    const double elapsed = seconds_since(start);
    std::ostringstream d;
    d << "lambda=" << fmt("%.4f", fit.lambda) << " in [" << kLambdaLo << ", " << kLambdaHi
      << "], kappa=" << fmt("%.4f", fit.kappa) << " in [" << kKappaLo << ", " << kKappaHi
      << "], rms=" << fmt("%.4f", fit.rms_residual) << " runtime=" << fmt("%.1f", elapsed) << "s";
    const bool lambda_ok = fit.lambda >= kLambdaLo && fit.lambda <= kLambdaHi;
    const bool kappa_ok = fit.kappa >= kKappaLo && fit.kappa <= kKappaHi;
    return {lambda_ok && kappa_ok && elapsed < kCalibrationRuntimeSeconds, d.str()};
}

Outcome scalar_regime_mean() {
    ExperimentConfig cfg = desk();
    cfg.alpha = 1.0;
    cfg.beta = 1.0;
    cfg.a_m = 2.0;
    cfg.b_m = 5.0;
    cfg.a_x = 5.0;
    cfg.b_x = 2.0;
    cfg.sigma = 0.5;
    cfg.rho = 1.0 / 3.0;
    cfg.theta = (1.0 - 1.0 / 3.0) / 2.0;
    cfg.pi = 1.0 - 1.0 / 3.0 - (1.0 - 1.0 / 3.0) / 2.0;
    cfg.p = 1000;

    ScalarRegime regime;
    regime.sigma = 0.5;
    regime.alpha = 1.0;
    regime.beta = 1.0;
    regime.mu = 0.5;
    regime.rho = 1.0 / 3.0;
    regime.theta = 1.0 / 3.0;
    regime.leader_initial = {BetaDistribution(2.0, 5.0).mean(), 0.0};
    regime.agent_initial = {BetaDistribution(5.0, 2.0).mean(), 0.0};
    const double predicted = predicted_stats(regime).leaders.mean;

    const auto run = run_replicate(cfg, 0);
    const double simulated = sample_stats(run.simulated.leaders).mean;
    const double target = 11.0 / 28.0;
    std::ostringstream d;
    d << "predicted=" << fmt("%.15f", predicted) << " (11/28=" << fmt("%.15f", target)
      << ") simulated=" << fmt("%.5f", simulated) << " at p=1000";
    return {std::abs(predicted - target) <= kScalarExactTol &&
                std::abs(simulated - target) <= kScalarSimTol,
            d.str()};
}

std::vector<SweepRow> sweep(const std::string& param, std::vector<double> values) {
    SweepSpec spec;
    spec.base = desk();
    spec.parameter = param;
    spec.values = std::move(values);
    spec.replicates = 1;
    return run_sweep(spec);
}

Outcome mu_linearity() {
    std::vector<double> mus;
    for (int i = 1; i <= 9; ++i) {
        mus.push_back(0.1 * i);
    }
    const auto rows = sweep("mu", mus);
    std::vector<double> y;
    for (const auto& r : rows) {
        y.push_back(r.simulated_leaders.mean);
    }
    const double k = static_cast<double>(mus.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        sx += mus[i];
        sy += y[i];
        sxx += mus[i] * mus[i];
        sxy += mus[i] * y[i];
    }
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    const double icept = (sy - slope * sx) / k;
    double worst = 0.0;
    for (std::size_t i = 0; i < mus.size(); ++i) {
        worst = std::max(worst, std::abs(y[i] - (icept + slope * mus[i])));
    }
    std::ostringstream d;
    d << "max deviation from least-squares line=" << fmt("%.5f", worst) << " (tol "
      << kMuLinearityTol << "), slope=" << fmt("%.4f", slope);
    return {worst <= kMuLinearityTol && slope > 0.0, d.str()};
}

Outcome rho_variance() {
    std::vector<double> rhos;
    for (int i = 1; i <= 9; ++i) {
        rhos.push_back(0.1 * i);
    }
    ExperimentConfig base = desk();
    double worst = 0.0;
    for (double rho : rhos) {
        ExperimentConfig cfg = base;
        set_parameter(cfg, "rho", rho);
        const auto run = run_replicate(cfg, 0);
        const double x0_var = sample_stats(run.populations.agents.initial_opinions()).variance;
        const double sim_var = sample_stats(run.simulated.agents).variance;
        const double expected = rho * rho * x0_var;
        worst = std::max(worst, std::abs(sim_var - expected) / expected);
    }
    std::ostringstream d;
    d << "max relative deviation of agent variance from rho^2 var(x0)=" << fmt("%.4f", worst)
      << " (tol " << kRhoVarianceRelTol << ")";
    return {worst <= kRhoVarianceRelTol, d.str()};
}

Outcome variance_monotone(const std::string& param, std::vector<double> grid, bool increasing) {
    const auto rows = sweep(param, grid);
    bool sim_ok = true;
    bool pred_ok = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double ds = rows[i].simulated_leaders.variance - rows[i - 1].simulated_leaders.variance;
        const double dp = rows[i].predicted_leaders.variance - rows[i - 1].predicted_leaders.variance;
        sim_ok = sim_ok && (increasing ? ds >= 0.0 : ds <= 0.0);
        pred_ok = pred_ok && (increasing ? dp >= 0.0 : dp <= 0.0);
    }
    std::ostringstream d;
    d << "leader variance " << (increasing ? "nondecreasing" : "nonincreasing") << " in " << param
      << " over " << grid.size() << " points: simulated " << (sim_ok ? "yes" : "no")
      << ", predicted " << (pred_ok ? "yes" : "no") << " (first "
      << fmt("%.5f", rows.front().simulated_leaders.variance) << ", last "
      << fmt("%.5f", rows.back().simulated_leaders.variance) << ")";
    return {sim_ok && pred_ok, d.str()};
}

Outcome fixed_point_agreement() {
    const MessageDistribution uniform(1.0, 1.0);
    double worst = 0.0;
    std::size_t points = 0;
    for (int s = 1; s <= 9; ++s) {
        for (double alpha : {0.6, 0.8, 1.0}) {
            for (double beta : {1.5, 2.0, 3.0, 4.0}) {
                for (double m0 : {0.1, 0.5, 0.9}) {
                    const double sigma = 0.1 * s;
                    const double fp =
                        leader_ss_fixed_point(sigma, m0, uniform, alpha, beta).value;
                    const double z = modified_stubbornness(sigma, alpha, beta);
                    const double an = z * m0 + (1.0 - z) * uniform.mean();
                    worst = std::max(worst, std::abs(fp - an));
                    ++points;
                }
            }
        }
    }
    std::ostringstream d;
    d << "max |fixed point - analytic|=" << fmt("%.5f", worst) << " over " << points
      << " points (tol " << kOracleTol << ")";
    return {worst <= kOracleTol, d.str()};
}

Outcome linear_solve_residual() {
    CounterRng rng(31337);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto p = static_cast<Eigen::Index>(1 + rng() % 50);
        const auto q = static_cast<Eigen::Index>(1 + rng() % 400);
        const auto sys = testing::random_system(rng, p, q);
        const Vector m = testing::random_unit(p, rng);
        const Vector x = agent_ss(sys.agents, m);
        worst = std::max(worst, agent_ss_residual(sys.agents, m, x));
    }
    std::ostringstream d;
    d << "max residual over 100 random configs=" << fmt("%.3e", worst) << " (tol "
      << kResidualTol << ")";
    return {worst <= kResidualTol, d.str()};
}

Outcome estimator_noiseless() {
    double worst = 0.0;
    for (auto [a, b] : {std::pair{0.8, 2.1}, std::pair{0.65, 1.4}, std::pair{0.95, 3.7}}) {
        const auto est = estimate_preference_coeffs(testing::planted(a, b, 30, 99));
        worst = std::max({worst, std::abs(est.alpha - a), std::abs(est.beta - b)});
    }
    std::ostringstream d;
    d << "max |estimate - truth| over 3 planted settings=" << fmt("%.5f", worst) << " (tol "
      << kEstimatorNoiselessTol << ")";
    return {worst <= kEstimatorNoiselessTol, d.str()};
}

Outcome estimator_noisy() {
    double err_a = 0.0;
    double err_b = 0.0;
    for (std::size_t s = 0; s < kEstimatorSeeds; ++s) {
        const auto est = estimate_preference_coeffs(testing::planted(0.8, 2.1, 30, s, kEstimatorNoise));
        err_a += std::abs(est.alpha - 0.8);
        err_b += std::abs(est.beta - 2.1);
    }
    err_a /= kEstimatorSeeds;
    err_b /= kEstimatorSeeds;
    std::ostringstream d;
    d << "mean |alpha error|=" << fmt("%.4f", err_a) << " mean |beta error|=" << fmt("%.4f", err_b)
      << " over " << kEstimatorSeeds << " seeds at noise " << kEstimatorNoise << " (tol "
      << kEstimatorNoisyTol << ")";
    return {err_a <= kEstimatorNoisyTol && err_b <= kEstimatorNoisyTol, d.str()};
}

Outcome model_comparison() {
    bool ok = true;
    std::ostringstream d;
    for (double noise : {0.0, 0.01}) {
        SyntheticDatasetOptions gen;
        gen.seed = 7;
        gen.noise = noise;
        const auto report = compare_models(generate_mp_dataset(gen), {});
        const auto& overall = report.overall();
        const std::size_t mp = report.models.size() - 1;
        ok = ok && report.models.size() == 7;
        d << (noise == 0.0 ? "" : "; ") << "noise " << noise << " overall leader/agent RMSE:";
        for (std::size_t m = 0; m < report.models.size(); ++m) {
            d << " " << report.models[m] << "=" << fmt("%.4f", overall.leader_rmse[m]) << "/"
              << fmt("%.4f", overall.agent_rmse[m]);
            if (m != mp) {
                ok = ok && overall.leader_rmse[mp] < overall.leader_rmse[m] &&
                     overall.agent_rmse[mp] < overall.agent_rmse[m];
            }
        }
    }
    return {ok, d.str()};
}

Outcome invariant(std::size_t (*check)(std::size_t, std::uint64_t), std::uint64_t seed) {
    const std::size_t failures = check(kInvariantCases, seed);
    std::ostringstream d;
    d << failures << " failures in " << kInvariantCases << " randomized cases";
    return {failures == 0, d.str()};
}

struct Criterion {
    std::string name;
    std::function<Outcome()> run;
};

std::vector<Criterion> criteria() {
    return {
        {"correlation_small_n", [] { return correlation(10, kCorrSmallN); }},
        {"correlation_large_n", [] { return correlation(1000, kCorrLargeN); }},
        {"calibration_constants", calibration_constants},
        {"scalar_regime_mean", scalar_regime_mean},
        {"mu_linearity", mu_linearity},
        {"rho_variance", rho_variance},
        {"beta_sweep_monotone",
         [] {
             return variance_monotone("beta", {1.1, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 4.9}, true);
         }},
        {"alpha_sweep_monotone",
         [] {
             return variance_monotone("alpha", {0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0},
                                      false);
         }},
        {"fixed_point_agreement", fixed_point_agreement},
        {"linear_solve_residual", linear_solve_residual},
        {"estimator_noiseless", estimator_noiseless},
        {"estimator_noisy", estimator_noisy},
        {"model_comparison", model_comparison},
        {"invariant_simplex", [] { return invariant(testing::simplex_failures, 101); }},
        {"invariant_closure", [] { return invariant(testing::closure_failures, 202); }},
        {"invariant_determinism", [] { return invariant(testing::determinism_failures, 303); }},
        {"invariant_permutation", [] { return invariant(testing::permutation_failures, 404); }},
    };
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string only;
    app.add_option("--only", only, "Run a single criterion");
    bool list = false;
    app.add_flag("--list", list, "Print criterion names and exit");
    CLI11_PARSE(app, argc, argv);

    const auto all = criteria();
    if (list) {
        for (const auto& c : all) {
            std::printf("%s\n", c.name.c_str());
        }
        return 0;
    }
    int failed = 0;
    int ran = 0;
    for (const auto& c : all) {
        if (!only.empty() && c.name != only) {
            continue;
        }
        ++ran;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    if (ran == 0) {
        std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
        return 2;
    }
    return failed == 0 ? 0 : 1;
}
