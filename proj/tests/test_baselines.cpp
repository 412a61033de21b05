#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "twostep/baselines.hpp"
#include "twostep/errors.hpp"

using namespace twostep;
using twostep::testing::uniform_vector;
using twostep::testing::vec;

namespace {

BaselineSpec hk(double eps) { return {BaselineKind::HK, {{"epsilon", eps}}}; }

BaselineSpec any_spec(BaselineKind kind) { return default_parameter_grid(kind)[5]; }

ObservedRow leader_row(std::string scenario, std::string id, double m0, double sigma,
                       double final_opinion, std::vector<double> messages) {
    ObservedRow r;
    r.scenario_id = std::move(scenario);
    r.subject_id = std::move(id);
    r.role = Role::leader;
    r.initial_opinion = m0;
    r.final_opinion = final_opinion;
    r.stubbornness = sigma;
    r.messages = std::move(messages);
    return r;
}

ObservedRow agent_row(std::string scenario, std::string id, double x0, double rho,
                      double final_opinion, std::vector<double> weights) {
    ObservedRow r;
    r.scenario_id = std::move(scenario);
    r.subject_id = std::move(id);
    r.role = Role::agent;
    r.initial_opinion = x0;
    r.final_opinion = final_opinion;
    r.stubbornness = rho;
    r.weights = std::move(weights);
    return r;
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("kind names round-trip") {
    for (auto kind : kAllBaselines) {
        CHECK(parse_baseline_kind(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(parse_baseline_kind("DeGroot"), ValidationError);
    CHECK(required_parameters(BaselineKind::SBC) == std::vector<std::string>{"epsilon", "steepness"});
    CHECK(required_parameters(BaselineKind::CSN_log) == std::vector<std::string>{"rate"});
}

TEST_CASE("parameter validation names the parameter") {
    auto field_of = [](const BaselineSpec& s) {
        try {
            validate(s);
        } catch (const ValidationError& e) {
            return e.field();
        }
        return std::string();
    };
    CHECK(field_of({BaselineKind::HK, {}}) == "epsilon");
    CHECK(field_of(hk(0.0)) == "epsilon");
    CHECK(field_of(hk(std::nan(""))) == "epsilon");
    CHECK(field_of({BaselineKind::BOF, {{"bias", -1.0}}}) == "bias");
    CHECK(field_of({BaselineKind::SBC, {{"epsilon", 0.2}, {"steepness", 0.0}}}) == "steepness");
    CHECK(field_of({BaselineKind::CSN_sine, {{"rate", 1.5}}}) == "rate");
    CHECK(field_of(hk(0.3)).empty());
    for (auto kind : kAllBaselines) {
        for (const auto& spec : default_parameter_grid(kind)) {
            CHECK_NOTHROW(validate(spec));
        }
    }
}

TEST_CASE("hand-computed steps") {
    CounterRng rng(1);
    const LeaderPopulation flexible(vec({0.4}), vec({0.0}), 1.0, 1.0);
    const Vector s = vec({0.1, 0.5, 0.9});

    CHECK(baseline_leader_step(hk(1.0), vec({0.4}), s, flexible, rng)[0] == doctest::Approx(0.5));
    CHECK(baseline_leader_step(hk(0.2), vec({0.4}), s, flexible, rng)[0] == doctest::Approx(0.5));
    CHECK(baseline_leader_step(hk(0.05), vec({0.4}), s, flexible, rng)[0] ==
          doctest::Approx(0.4));

    const BaselineSpec bof{BaselineKind::BOF, {{"bias", 1.0}}};
    // S = 0.5: A = 0.4 * 0.5 / (0.4 * 0.5 + 0.6 * 0.5) = 0.4.
    CHECK(baseline_leader_step(bof, vec({0.4}), s, flexible, rng)[0] == doctest::Approx(0.4));
    const BaselineSpec neutral{BaselineKind::BOF, {{"bias", 0.0}}};
    CHECK(baseline_leader_step(neutral, vec({0.4}), s, flexible, rng)[0] == doctest::Approx(0.5));

    const BaselineSpec lin{BaselineKind::CSN_linear, {{"rate", 1.0}}};
    // pull = (0.7 (-0.3) + 0.9 (0.1) + 0.5 (0.5)) / 3 = 0.13 / 3.
    CHECK(baseline_leader_step(lin, vec({0.4}), s, flexible, rng)[0] ==
          doctest::Approx(0.4 + 0.13 / 3.0));

    const LeaderPopulation fixed(vec({0.4}), vec({1.0}), 1.0, 1.0);
    for (auto kind : kAllBaselines) {
        CHECK(baseline_leader_step(any_spec(kind), vec({0.8}), s, fixed, rng)[0] ==
              doctest::Approx(0.4));
    }
}

TEST_CASE("steep SBC is HK") {
    const BaselineSpec sbc{BaselineKind::SBC, {{"epsilon", 0.3}, {"steepness", 1e9}}};
    const LeaderPopulation leaders(vec({0.2, 0.6}), vec({0.3, 0.5}), 1.0, 1.0);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        CounterRng rng(seed);
        const Vector s = uniform_vector(6, rng);
        const Vector m = uniform_vector(2, rng);
        const Vector a = baseline_leader_step(sbc, m, s, leaders, rng);
        const Vector b = baseline_leader_step(hk(0.3), m, s, leaders, rng);
        CHECK(a[0] == doctest::Approx(b[0]));
        CHECK(a[1] == doctest::Approx(b[1]));
    }
}

TEST_CASE("stubborn leaders keep their initial opinion under every rule") {
    const LeaderPopulation leaders(vec({0.1, 0.7}), vec({1.0, 1.0}), 1.0, 1.0);
    const auto source = MessageSource::sampled(MessageDistribution(2, 2), 30);
    for (auto kind : kAllBaselines) {
        const Vector ss = baseline_predict_ss(any_spec(kind), leaders, source, 30, 4, 2);
        CHECK(ss[0] == doctest::Approx(0.1));
        CHECK(ss[1] == doctest::Approx(0.7));
    }
}

TEST_CASE("single-run selective prediction is the simulated tail") {
    const MessageDistribution dist(2, 5);
    const LeaderPopulation leaders(vec({0.1, 0.5, 0.9}), vec({0.2, 0.5, 0.8}), 0.8, 2.0);
    const AgentPopulation agents(vec({0.5}), vec({1.0}), vec({0.0}), vec({0.0}),
                                 Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 3, 1.0 / 3));
    const Vector pred =
        predict_leader_ss(selective_update(), leaders, MessageSource::sampled(dist, 50), 40, 17, 1);
    CounterRng rng = CounterRng::substream(17, 0);
    const auto tail = tail_average(simulate(dist, leaders, agents, {50, 40, false}, rng));
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK(pred[i] == doctest::Approx(tail.leaders[i]).epsilon(1e-12));
    }
}

TEST_CASE("more runs barely move a large-sample estimate") {
    const LeaderPopulation leaders(vec({0.2, 0.8}), vec({0.4, 0.6}), 1.0, 1.0);
    const auto source = MessageSource::sampled(MessageDistribution(1, 1), 10000);
    const BaselineSpec sbc{BaselineKind::SBC, {{"epsilon", 0.3}, {"steepness", 4.0}}};
    const Vector one = baseline_predict_ss(sbc, leaders, source, 25, 3, 2);
    const Vector two = baseline_predict_ss(sbc, leaders, source, 25, 3, 4);
    CHECK((one - two).lpNorm<Eigen::Infinity>() < 0.01);
}

TEST_CASE("prediction preconditions") {
    const LeaderPopulation leaders(vec({0.2}), vec({0.4}), 1.0, 1.0);
    const auto source = MessageSource::fixed(vec({0.3}));
    CHECK_THROWS_AS(baseline_predict_ss(hk(0.2), leaders, source, 0, 0, 1), ValidationError);
    CHECK_THROWS_AS(baseline_predict_ss(hk(0.2), leaders, source, 10, 0, 0), ValidationError);
    CounterRng rng(0);
    CHECK_THROWS_AS(baseline_leader_step(hk(0.2), vec({0.1, 0.2}), vec({0.3}), leaders, rng),
                    DimensionMismatch);
}

TEST_CASE("rmse") {
    CHECK(rmse(vec({0.5, 0.5}), vec({0.3, 0.7})) == doctest::Approx(0.2));
    CHECK(rmse(vec({0.3, 0.7}), vec({0.5, 0.5})) == rmse(vec({0.5, 0.5}), vec({0.3, 0.7})));
    CHECK(rmse(std::vector<double>{0.1}, std::vector<double>{0.1}) == 0.0);
    CHECK_THROWS_AS(rmse(vec({0.1}), vec({0.1, 0.2})), DimensionMismatch);
}

TEST_CASE("comparison on fully stubborn subjects is exact for every model") {
    ObservedDataset d;
    d.rows.push_back(leader_row("A/1", "L1", 0.2, 1.0, 0.2, {0.1, 0.9, 0.5}));
    d.rows.push_back(leader_row("A/1", "L2", 0.8, 1.0, 0.8, {0.3, 0.4}));
    d.rows.push_back(agent_row("A/1", "X1", 0.4, 1.0, 0.4, {0.5, 0.0, 0.0, 0.5}));
    d.rows.push_back(agent_row("A/1", "X2", 0.6, 1.0, 0.6, {0.0, 1.0, 0.0, 0.0}));
    CompareOptions opt;
    opt.estimate_preferences = false;
    opt.steps = 20;
    opt.n_runs = 2;
    const auto report = compare_models(d, opt);
    CHECK(report.models.size() == 7);
    CHECK(report.models.back() == "MP");
    REQUIRE(report.rows.size() == 2);
    for (const auto& row : report.rows) {
        for (std::size_t m = 0; m < report.models.size(); ++m) {
            CHECK(row.leader_rmse[m] == doctest::Approx(0.0));
            CHECK(row.agent_rmse[m] == doctest::Approx(0.0));
        }
    }
    // One label: its row and the overall row coincide.
    CHECK(report.rows[0].scenario == "A");
    CHECK(report.rows[0].leader_count == report.overall().leader_count);
}

TEST_CASE("generator recovery and the pooling identity") {
    SyntheticDatasetOptions gen;
    gen.scenarios = 3;
    gen.groups = 4;
    gen.steps = 60;
    gen.seed = 11;
    const auto data = generate_mp_dataset(gen);
    CompareOptions opt;
    opt.steps = 60;
    opt.n_runs = 2;
    opt.baselines = {BaselineKind::HK, BaselineKind::BOF, BaselineKind::CSN_linear};
    const auto report = compare_models(data, opt);
    CHECK(report.alpha == doctest::Approx(0.8).epsilon(0.02));
    const auto& overall = report.overall();
    const std::size_t mp = report.models.size() - 1;
    for (std::size_t m = 0; m < mp; ++m) {
        CHECK(overall.leader_rmse[mp] < overall.leader_rmse[m]);
        CHECK(overall.agent_rmse[mp] < overall.agent_rmse[m]);
    }
    for (std::size_t m = 0; m <= mp; ++m) {
        double leader_sse = 0.0;
        double agent_sse = 0.0;
        for (std::size_t r = 0; r + 1 < report.rows.size(); ++r) {
            const auto& row = report.rows[r];
            leader_sse += row.leader_rmse[m] * row.leader_rmse[m] * row.leader_count;
            agent_sse += row.agent_rmse[m] * row.agent_rmse[m] * row.agent_count;
        }
        CHECK(overall.leader_rmse[m] ==
              doctest::Approx(std::sqrt(leader_sse / overall.leader_count)));
        CHECK(overall.agent_rmse[m] == doctest::Approx(std::sqrt(agent_sse / overall.agent_count)));
    }
}

}
