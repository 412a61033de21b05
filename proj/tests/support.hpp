#ifndef TWOSTEP_TESTS_SUPPORT_HPP
#define TWOSTEP_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <vector>

#include "twostep/calibration.hpp"
#include "twostep/model.hpp"

namespace twostep::testing {

inline Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out[i++] = x;
    }
    return out;
}

inline Vector uniform_vector(Eigen::Index k, CounterRng& rng) {
    Vector out(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        out[i] = rng.uniform();
    }
    return out;
}

/// Observations whose weights are the model's coefficients at (alpha, beta),
/// optionally with additive Gaussian noise (clipped at 0, renormalized).
inline std::vector<PreferenceObservation> planted(double alpha, double beta, std::size_t count,
                                                  std::uint64_t seed, double noise = 0.0) {
    CounterRng rng(seed);
    std::vector<PreferenceObservation> out;
    for (std::size_t k = 0; k < count; ++k) {
        PreferenceObservation obs;
        obs.m_prev = rng.uniform();
        obs.messages = uniform_vector(8, rng);
        Vector w = selective_coefficients(obs.m_prev, obs.messages, alpha, beta);
        if (noise > 0.0) {
            for (Eigen::Index j = 0; j < w.size(); ++j) {
                // Box-Muller keeps the test independent of the library samplers.
                const double u1 = 1.0 - rng.uniform();
                const double u2 = rng.uniform();
                const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
                w[j] = std::max(0.0, w[j] + noise * z);
            }
            w /= w.sum();
        }
        obs.observed_weights = w;
        out.push_back(std::move(obs));
    }
    return out;
}

}  // namespace twostep::testing

#endif  // TWOSTEP_TESTS_SUPPORT_HPP
