#pragma once

#include <complex>
#include <vector>

namespace tracker {

// Polynomials are coefficient vectors in ascending powers: p[i] multiplies z^i.

double poly_eval(const std::vector<double>& p, double z);
std::complex<double> poly_eval(const std::vector<double>& p, std::complex<double> z);
std::complex<double> poly_derivative_eval(const std::vector<double>& p, std::complex<double> z);

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b);

/// Monic polynomial with the given roots (complex roots must come in
/// conjugate pairs; the imaginary residue is discarded).
std::vector<double> poly_from_roots(const std::vector<std::complex<double>>& roots);

/// All roots via companion-matrix QR iteration followed by one Newton polish
/// per root. Leading zero coefficients are stripped with a relative tolerance.
std::vector<std::complex<double>> poly_roots(const std::vector<double>& p);

}  // namespace tracker
