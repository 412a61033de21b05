#include "twostep/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace twostep::quadrature {

GaussLegendre::GaussLegendre(std::size_t order) : nodes(order), weights(order) {
    if (order == 0) {
        throw std::invalid_argument("GaussLegendre: order must be positive");
    }
    const std::size_t n = order;
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kd = static_cast<double>(k);
                const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

const GaussLegendre& gauss_legendre_64() {
    static const GaussLegendre rule(64);
    return rule;
}

namespace {

// Integral of g(t) over t in [0, h], g ~ t^e near 0. Passes t (distance from
// the singular end) to g.
template <typename G>
double integrate_from_end(const G& g, double h, double exponent, const GaussLegendre& rule) {
    if (h <= 0.0) {
        return 0.0;
    }
    const double power = exponent < 0.0 ? exponent + 1.0 : 1.0;
    const double upper = std::pow(h, power);
    const double inv = 1.0 / power;
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.order(); ++k) {
        const double u = 0.5 * (rule.nodes[k] + 1.0) * upper;
        const double t = std::pow(u, inv);
        const double jacobian = inv * std::pow(u, inv - 1.0);
        sum += rule.weights[k] * jacobian * g(t);
    }
    return 0.5 * upper * sum;
}

}  // namespace

double integrate_endpoint_powers(const EndpointIntegrand& f, double length, double left_exponent,
                                 double right_exponent, const GaussLegendre& rule) {
    if (!(left_exponent > -1.0) || !(right_exponent > -1.0)) {
        throw std::invalid_argument("integrate_endpoint_powers: exponents must exceed -1");
    }
    if (length <= 0.0) {
        return 0.0;
    }
    const double half = 0.5 * length;
    const double left = integrate_from_end(
        [&](double t) { return f(t, length - t); }, half, left_exponent, rule);
    const double right = integrate_from_end(
        [&](double t) { return f(length - t, t); }, half, right_exponent, rule);
    return left + right;
}

}  // namespace twostep::quadrature
