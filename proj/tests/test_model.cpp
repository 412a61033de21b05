#include <doctest.h>

#include <cmath>

#include "twostep/errors.hpp"
#include "twostep/model.hpp"
#include "twostep/steady_state.hpp"

using namespace twostep;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out[i++] = x;
    }
    return out;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("admissible preference region") {
    CHECK_NOTHROW(validate_preference(1.0, 1.0));
    CHECK_NOTHROW(validate_preference(0.51, 1.01));
    CHECK_NOTHROW(validate_preference(1.0, 5.0));
    CHECK_THROWS_AS(validate_preference(0.5, 2.0), ValidationError);
    CHECK_THROWS_AS(validate_preference(1.1, 2.0), ValidationError);
    CHECK_THROWS_AS(validate_preference(0.8, 1.0), ValidationError);
    CHECK_THROWS_AS(validate_preference(1.0, 0.9), ValidationError);
    try {
        validate_preference(1.0, 0.5);
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "beta");
    }
}

TEST_CASE("message preference kernel") {
    // d = 0.5: (0.25)^(alpha - 1) (0.75)^(beta - 1)
    CHECK(message_preference(0.2, 0.7, 0.8, 2.0).value() ==
          doctest::Approx(std::pow(0.25, -0.2) * 0.75));
    CHECK(message_preference(0.3, 0.3, 1.0, 2.0).value() == doctest::Approx(1.0));
    CHECK(message_preference(0.0, 1.0, 1.0, 2.0).value() == 0.0);
    CHECK(message_preference(0.4, 0.9, 1.0, 1.0).value() == 1.0);

    const auto hit = message_preference(0.4, 0.4, 0.9, 2.0);
    CHECK(hit.is_infinite());
    CHECK_THROWS(hit.value());
}

TEST_CASE("selective coefficients") {
    SUBCASE("exact matches share all the weight") {
        const Vector g = selective_coefficients(0.5, vec({0.5, 0.1, 0.5, 0.9}), 0.8, 2.0);
        CHECK(g[0] == 0.5);
        CHECK(g[1] == 0.0);
        CHECK(g[2] == 0.5);
        CHECK(g[3] == 0.0);
    }
    SUBCASE("all-zero preferences fall back to uniform") {
        const Vector g = selective_coefficients(0.0, vec({1.0, 1.0}), 1.0, 2.0);
        CHECK(g[0] == 0.5);
        CHECK(g[1] == 0.5);
    }
    SUBCASE("no selectivity gives uniform weights") {
        const Vector g = selective_coefficients(0.3, vec({0.1, 0.6, 0.95}), 1.0, 1.0);
        for (Eigen::Index j = 0; j < 3; ++j) {
            CHECK(g[j] == doctest::Approx(1.0 / 3.0));
        }
    }
    SUBCASE("nearer messages weigh more") {
        const Vector g = selective_coefficients(0.3, vec({0.35, 0.9}), 1.0, 3.0);
        CHECK(g[0] > g[1]);
        CHECK(g.sum() == doctest::Approx(1.0));
    }
    SUBCASE("average agrees with coefficients") {
        const Vector s = vec({0.05, 0.4, 0.41, 0.77, 0.99});
        for (double a : {0.6, 0.8, 1.0}) {
            const Vector g = selective_coefficients(0.42, s, a, 2.5);
            CHECK(selective_average(0.42, s, a, 2.5) == doctest::Approx(g.dot(s)).epsilon(1e-14));
        }
    }
}

TEST_CASE("population validation") {
    CHECK_THROWS_AS(LeaderPopulation(vec({0.2, 1.2}), vec({0.5, 0.5}), 1.0, 2.0), ValidationError);
    CHECK_THROWS_AS(LeaderPopulation(vec({0.2}), vec({0.5, 0.5}), 1.0, 2.0), DimensionMismatch);

    const Matrix W = Matrix::Constant(2, 2, 0.5);
    const Matrix U = Matrix::Constant(2, 1, 1.0);
    CHECK_NOTHROW(AgentPopulation(vec({0.1, 0.2}), vec({0.2, 0.2}), vec({0.4, 0.4}),
                                  vec({0.4, 0.4}), W, U));
    CHECK_THROWS_AS(AgentPopulation(vec({0.1, 0.2}), vec({0.2, 0.2}), vec({0.4, 0.4}),
                                    vec({0.5, 0.4}), W, U),
                    ValidationError);
    Matrix bad = W;
    bad(1, 1) = 0.6;
    CHECK_THROWS_AS(AgentPopulation(vec({0.1, 0.2}), vec({0.2, 0.2}), vec({0.4, 0.4}),
                                    vec({0.4, 0.4}), bad, U),
                    ValidationError);
}

TEST_CASE("one leader step by hand") {
    const LeaderPopulation leaders(vec({0.2, 0.8}), vec({0.25, 1.0}), 1.0, 1.0);
    const Vector m = leader_step(leaders, vec({0.2, 0.8}), vec({0.0, 0.6}));
    CHECK(m[0] == doctest::Approx(0.25 * 0.2 + 0.75 * 0.3));
    CHECK(m[1] == doctest::Approx(0.8));

    Matrix gamma;
    leader_step(leaders, vec({0.2, 0.8}), vec({0.0, 0.6}), gamma);
    CHECK(gamma.rows() == 2);
    CHECK(gamma.cols() == 2);
    CHECK(gamma(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("one agent step by hand") {
    const Matrix W = (Matrix(2, 2) << 0.0, 1.0, 1.0, 0.0).finished();
    const Matrix U = Matrix::Constant(2, 1, 1.0);
    const AgentPopulation agents(vec({0.1, 0.9}), vec({0.5, 0.2}), vec({0.25, 0.3}),
                                 vec({0.25, 0.5}), W, U);
    const Vector x = agent_step(agents, vec({0.4, 0.6}), vec({1.0}));
    CHECK(x[0] == doctest::Approx(0.5 * 0.1 + 0.25 * 0.6 + 0.25));
    CHECK(x[1] == doctest::Approx(0.2 * 0.9 + 0.3 * 0.4 + 0.5));
}

TEST_CASE("simulation is reproducible and frozen when fully stubborn") {
    const MessageDistribution dist(2.0, 3.0);
    const LeaderPopulation leaders(vec({0.1, 0.5, 0.9}), vec({1.0, 1.0, 1.0}), 0.8, 2.0);
    const Matrix W = Matrix::Constant(2, 2, 0.5);
    const Matrix U = Matrix::Constant(2, 3, 1.0 / 3.0);
    const AgentPopulation agents(vec({0.3, 0.7}), vec({1.0, 1.0}), vec({0.0, 0.0}),
                                 vec({0.0, 0.0}), W, U);
    CounterRng r1(5);
    CounterRng r2(5);
    const auto t1 = simulate(dist, leaders, agents, {50, 30, true}, r1);
    const auto t2 = simulate(dist, leaders, agents, {50, 30, true}, r2);
    CHECK(t1.steps() == 30);
    CHECK(t1.selective_coeffs.size() == 30);
    for (std::size_t t = 0; t <= 30; ++t) {
        CHECK(t1.leader_opinions[t] == t2.leader_opinions[t]);
        CHECK(t1.agent_opinions[t] == t2.agent_opinions[t]);
    }
    const auto tail = tail_average(t1);
    CHECK((tail.leaders - leaders.initial_opinions()).lpNorm<Eigen::Infinity>() < 1e-15);
    CHECK((tail.agents - agents.initial_opinions()).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("tail average window") {
    Trajectory traj;
    for (int t = 0; t <= 4; ++t) {
        traj.leader_opinions.push_back(Vector::Constant(1, t));
        traj.agent_opinions.push_back(Vector::Constant(1, 2 * t));
    }
    const auto avg = tail_average(traj, 2);
    CHECK(avg.leaders[0] == doctest::Approx(3.5));
    CHECK(avg.agents[0] == doctest::Approx(7.0));
    CHECK(tail_average(traj, 100).leaders[0] == doctest::Approx(2.5));
}

TEST_CASE("Beta(2, 5) sample mean") {
    CounterRng rng(11);
    const Vector draws = sample_messages(MessageDistribution(2.0, 5.0), 100000, rng);
    CHECK(std::abs(sample_stats(draws).mean - 2.0 / 7.0) < 0.01);
    CHECK((draws.array() >= 0.0).all());
    CHECK((draws.array() <= 1.0).all());
}

}
