#ifndef TWOSTEP_QUADRATURE_HPP
#define TWOSTEP_QUADRATURE_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace twostep::quadrature {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(std::size_t order);
    std::size_t order() const noexcept { return nodes.size(); }
};

/// Shared 64-point rule.
const GaussLegendre& gauss_legendre_64();

/// Integrand on an interval of length L, evaluated through the two distances
/// (from the left end, from the right end). Both are supplied so that callers
/// never recover a tiny distance by cancellation.
using EndpointIntegrand = std::function<double(double from_left, double from_right)>;

/// Integral over an interval of length `length` of a function that behaves
/// like (distance)^e near each end, with e > -1. The interval is split at its
/// midpoint; on each half whose end exponent is negative the substitution
/// u = t^(e+1) removes the singularity before the Gauss-Legendre rule is
/// applied.
double integrate_endpoint_powers(const EndpointIntegrand& f, double length, double left_exponent,
                                 double right_exponent,
                                 const GaussLegendre& rule = gauss_legendre_64());

}  // namespace twostep::quadrature

#endif  // TWOSTEP_QUADRATURE_HPP
