#include "phq/theta.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace phq {

using cplx = std::complex<double>;

cplx log_theta_char(double a, double b, cplx u, cplx tau) {
  if (!(tau.imag() > 0.0)) {
    throw std::invalid_argument("theta function needs Im(tau) > 0");
  }
  constexpr double pi = std::numbers::pi;
  const cplx i(0.0, 1.0);
  const auto exponent = [&](long n) {
    const double k = double(n) + a;
    return i * pi * tau * k * k + 2.0 * pi * i * k * (u + b);
  };
  // Re exponent is a downward parabola in k with its peak at k = -Im(u)/Im(tau).
  const long center = std::lround(-u.imag() / tau.imag() - a);
  const cplx e0 = exponent(center);
  const double ref = e0.real();
  cplx sum = std::exp(e0 - ref);
  for (int dir : {+1, -1}) {
    for (long step = 1;; ++step) {
      const cplx term = std::exp(exponent(center + dir * step) - ref);
      sum += term;
      if (std::abs(term) < 1e-16 * std::abs(sum) && step > 2) {
        break;
      }
      if (step > 10000) {
        throw std::runtime_error("theta series failed to converge");
      }
    }
  }
  return ref + std::log(sum);
}

cplx log_theta1(cplx z, cplx tau) {
  const cplx l = log_theta_char(0.5, 0.5, z / std::numbers::pi, tau);
  return l + cplx(0.0, std::numbers::pi);
}

} // namespace phq
