#pragma once

namespace onebit {

// Standard normal density and log density.
double normal_pdf(double a);
double log_normal_pdf(double a);

// log Phi(a), finite for every finite a. Below a = -30 the Mills-ratio
// asymptotic series replaces erfc, which underflows near a = -38.
double log_normal_cdf(double a);

// varphi(a) = phi(a) / Phi(a), the derivative of log Phi.
// Strictly positive: once the true value drops below the smallest subnormal
// (a > ~38.5) the result is floored at denorm_min.
double varphi(double a);

// psi(a) = d^2/da^2 log Phi(a) = -a varphi(a) - varphi(a)^2.
// Strictly negative for every finite a (same subnormal floor as varphi).
double psi(double a);
// psi(a) when v = varphi(a) is already known.
double psi_from_varphi(double a, double v);

}  // namespace onebit
