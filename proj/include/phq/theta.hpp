#pragma once

#include <complex>

namespace phq {

/// log of the Jacobi theta function with characteristics
///   theta[a; b](u | tau) = sum_n exp(i pi tau (n+a)^2 + 2 pi i (n+a)(u+b)).
/// Returned as a complex logarithm so that large |Im u| cannot overflow.
/// Terms are summed outward from the dominant one until they fall below
/// 1e-16 of the running sum. Requires Im tau > 0.
std::complex<double> log_theta_char(double a, double b, std::complex<double> u, std::complex<double> tau);

/// theta_1(z | tau) = -theta[1/2; 1/2](z / pi | tau).
std::complex<double> log_theta1(std::complex<double> z, std::complex<double> tau);

inline std::complex<double> theta_char(double a, double b, std::complex<double> u, std::complex<double> tau) {
  return std::exp(log_theta_char(a, b, u, tau));
}

} // namespace phq
