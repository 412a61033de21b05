#ifndef TWOSTEP_TESTS_PROPERTIES_HPP
#define TWOSTEP_TESTS_PROPERTIES_HPP

// Randomized invariant checks shared by the unit and acceptance suites. Each
// returns the number of failing cases out of `cases`.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "twostep/model.hpp"

namespace twostep::testing {

struct RandomCase {
    double alpha;
    double beta;
    double m_prev;
    Vector messages;
};

inline RandomCase random_case(CounterRng& rng) {
    RandomCase c;
    // Mix of the degenerate point and the selective region.
    if (rng.uniform() < 0.1) {
        c.alpha = 1.0;
        c.beta = 1.0;
    } else {
        c.alpha = 0.5 + 0.5 * (1.0 - rng.uniform());
        c.beta = 1.0 + 4.0 * (1.0 - rng.uniform());
    }
    c.m_prev = rng.uniform();
    const auto n = static_cast<Eigen::Index>(1 + rng() % 12);
    c.messages.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        c.messages[j] = rng.uniform();
    }
    // Occasionally plant exact matches and boundary messages.
    if (rng.uniform() < 0.2) {
        c.messages[static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n))] = c.m_prev;
    }
    if (rng.uniform() < 0.1) {
        c.messages[0] = rng.uniform() < 0.5 ? 0.0 : 1.0;
    }
    return c;
}

inline std::vector<Eigen::Index> random_permutation(Eigen::Index k, CounterRng& rng) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

struct RandomSystem {
    LeaderPopulation leaders;
    AgentPopulation agents;
};

inline Vector random_unit(Eigen::Index k, CounterRng& rng) {
    Vector v(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        v[i] = rng.uniform();
    }
    return v;
}

inline Matrix random_stochastic(Eigen::Index rows, Eigen::Index cols, CounterRng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = 1.0 - rng.uniform();
        }
        m.row(r) /= m.row(r).sum();
    }
    return m;
}

inline RandomSystem random_system(CounterRng& rng, Eigen::Index p, Eigen::Index q) {
    const RandomCase pref = random_case(rng);
    Vector rho(q), pi(q), theta(q);
    for (Eigen::Index i = 0; i < q; ++i) {
        const double a = 1.0 - rng.uniform();
        const double b = rng.uniform();
        const double c = 1.0 - rng.uniform();
        rho[i] = a / (a + b + c);
        theta[i] = c / (a + b + c);
        pi[i] = 1.0 - rho[i] - theta[i];
    }
    return {LeaderPopulation(random_unit(p, rng), random_unit(p, rng), pref.alpha, pref.beta),
            AgentPopulation(random_unit(q, rng), rho, pi, theta, random_stochastic(q, q, rng),
                            random_stochastic(q, p, rng))};
}

/// gamma is nonnegative, sums to one, and puts all mass on exact matches
/// whenever alpha < 1 and a match exists.
inline std::size_t simplex_failures(std::size_t cases, std::uint64_t seed) {
    CounterRng rng(seed);
    std::size_t failures = 0;
    for (std::size_t k = 0; k < cases; ++k) {
        const RandomCase c = random_case(rng);
        const Vector g = selective_coefficients(c.m_prev, c.messages, c.alpha, c.beta);
        bool ok = g.size() == c.messages.size() && g.minCoeff() >= 0.0 &&
                  std::abs(g.sum() - 1.0) <= 1e-12;
        if (ok && c.alpha < 1.0) {
            double on_matches = 0.0;
            bool any = false;
            for (Eigen::Index j = 0; j < g.size(); ++j) {
                if (c.messages[j] == c.m_prev) {
                    on_matches += g[j];
                    any = true;
                }
            }
            ok = !any || std::abs(on_matches - 1.0) <= 1e-12;
        }
        failures += ok ? 0 : 1;
    }
    return failures;
}

/// Opinions stay in [0, 1] through leader and agent steps.
inline std::size_t closure_failures(std::size_t cases, std::uint64_t seed) {
    CounterRng rng(seed);
    std::size_t failures = 0;
    for (std::size_t k = 0; k < cases; ++k) {
        const auto p = static_cast<Eigen::Index>(1 + rng() % 5);
        const auto q = static_cast<Eigen::Index>(1 + rng() % 5);
        const RandomSystem sys = random_system(rng, p, q);
        const RandomCase msgs = random_case(rng);
        const Vector m = leader_step(sys.leaders, random_unit(p, rng), msgs.messages);
        const Vector x = agent_step(sys.agents, random_unit(q, rng), m);
        const bool ok = m.minCoeff() >= 0.0 && m.maxCoeff() <= 1.0 && x.minCoeff() >= 0.0 &&
                        x.maxCoeff() <= 1.0;
        failures += ok ? 0 : 1;
    }
    return failures;
}

/// Same seed, same trajectory, bit for bit.
inline std::size_t determinism_failures(std::size_t cases, std::uint64_t seed) {
    CounterRng rng(seed);
    std::size_t failures = 0;
    for (std::size_t k = 0; k < cases; ++k) {
        const RandomSystem sys = random_system(rng, 3, 3);
        const MessageDistribution dist(0.5 + 3.0 * rng.uniform(), 0.5 + 3.0 * rng.uniform());
        const std::uint64_t run_seed = rng();
        CounterRng a(run_seed);
        CounterRng b(run_seed);
        const SimulateOptions opt{6, 4, false};
        const Trajectory ta = simulate(dist, sys.leaders, sys.agents, opt, a);
        const Trajectory tb = simulate(dist, sys.leaders, sys.agents, opt, b);
        bool ok = ta.leader_opinions.size() == tb.leader_opinions.size();
        for (std::size_t t = 0; ok && t < ta.leader_opinions.size(); ++t) {
            ok = ta.leader_opinions[t] == tb.leader_opinions[t] &&
                 ta.agent_opinions[t] == tb.agent_opinions[t];
        }
        failures += ok ? 0 : 1;
    }
    return failures;
}

/// Relabelling messages, leaders or agents relabels the outputs the same way.
inline std::size_t permutation_failures(std::size_t cases, std::uint64_t seed) {
    constexpr double tol = 1e-12;
    CounterRng rng(seed);
    std::size_t failures = 0;
    for (std::size_t k = 0; k < cases; ++k) {
        bool ok = true;

        const RandomCase c = random_case(rng);
        const auto n = c.messages.size();
        const auto mp = random_permutation(n, rng);
        Vector shuffled(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            shuffled[j] = c.messages[mp[static_cast<std::size_t>(j)]];
        }
        const Vector g = selective_coefficients(c.m_prev, c.messages, c.alpha, c.beta);
        const Vector gs = selective_coefficients(c.m_prev, shuffled, c.alpha, c.beta);
        for (Eigen::Index j = 0; j < n; ++j) {
            ok = ok && std::abs(gs[j] - g[mp[static_cast<std::size_t>(j)]]) <= tol;
        }

        const auto p = static_cast<Eigen::Index>(1 + rng() % 5);
        const auto q = static_cast<Eigen::Index>(1 + rng() % 5);
        const RandomSystem sys = random_system(rng, p, q);
        const auto lp = random_permutation(p, rng);
        const auto ap = random_permutation(q, rng);
        const Vector m_prev = random_unit(p, rng);
        const Vector x_prev = random_unit(q, rng);

        Vector m0(p), sigma(p), m_prev_p(p);
        for (Eigen::Index i = 0; i < p; ++i) {
            const auto src = lp[static_cast<std::size_t>(i)];
            m0[i] = sys.leaders.initial_opinions()[src];
            sigma[i] = sys.leaders.stubbornness()[src];
            m_prev_p[i] = m_prev[src];
        }
        const LeaderPopulation leaders_p(m0, sigma, sys.leaders.alpha(), sys.leaders.beta());
        const Vector m = leader_step(sys.leaders, m_prev, c.messages);
        const Vector m_p = leader_step(leaders_p, m_prev_p, c.messages);
        for (Eigen::Index i = 0; i < p; ++i) {
            ok = ok && std::abs(m_p[i] - m[lp[static_cast<std::size_t>(i)]]) <= tol;
        }

        const auto& ag = sys.agents;
        Vector x0(q), rho(q), pi(q), theta(q), x_prev_p(q);
        Matrix W(q, q), U(q, p);
        for (Eigen::Index i = 0; i < q; ++i) {
            const auto r = ap[static_cast<std::size_t>(i)];
            x0[i] = ag.initial_opinions()[r];
            rho[i] = ag.rho()[r];
            pi[i] = ag.pi()[r];
            theta[i] = ag.theta()[r];
            x_prev_p[i] = x_prev[r];
            for (Eigen::Index j = 0; j < q; ++j) {
                W(i, j) = ag.W()(r, ap[static_cast<std::size_t>(j)]);
            }
            for (Eigen::Index j = 0; j < p; ++j) {
                U(i, j) = ag.U()(r, lp[static_cast<std::size_t>(j)]);
            }
        }
        const AgentPopulation agents_p(x0, rho, pi, theta, W, U);
        const Vector x = agent_step(ag, x_prev, m);
        const Vector x_p = agent_step(agents_p, x_prev_p, m_p);
        for (Eigen::Index i = 0; i < q; ++i) {
            ok = ok && std::abs(x_p[i] - x[ap[static_cast<std::size_t>(i)]]) <= tol;
        }
        failures += ok ? 0 : 1;
    }
    return failures;
}

}  // namespace twostep::testing

#endif  // TWOSTEP_TESTS_PROPERTIES_HPP
