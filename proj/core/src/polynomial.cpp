#include "tracker/polynomial.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "tracker/errors.hpp"

namespace tracker {

double poly_eval(const std::vector<double>& p, double z) {
    double acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
    return acc;
}

std::complex<double> poly_eval(const std::vector<double>& p, std::complex<double> z) {
    std::complex<double> acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
    return acc;
}

std::complex<double> poly_derivative_eval(const std::vector<double>& p, std::complex<double> z) {
    std::complex<double> acc = 0.0;
    for (int i = static_cast<int>(p.size()) - 1; i >= 1; --i)
        acc = acc * z + static_cast<double>(i) * p[static_cast<size_t>(i)];
    return acc;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> poly_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> p{1.0};
    for (const auto& root : roots) {
        std::vector<std::complex<double>> q(p.size() + 1, 0.0);
        for (size_t i = 0; i < p.size(); ++i) {
            q[i + 1] += p[i];
            q[i] -= root * p[i];
        }
        p = std::move(q);
    }
    std::vector<double> out(p.size());
    for (size_t i = 0; i < p.size(); ++i) out[i] = p[i].real();
    return out;
}

std::vector<std::complex<double>> poly_roots(const std::vector<double>& p) {
    double scale = 0.0;
    for (double v : p) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) throw ContractViolation("poly_roots: zero polynomial");

    int deg = static_cast<int>(p.size()) - 1;
    while (deg > 0 && std::abs(p[static_cast<size_t>(deg)]) <= 1e-12 * scale) --deg;
    if (deg <= 0) return {};

    // Companion matrix of the monic-normalized polynomial; its eigenvalues are
    // the roots (Eigen runs the shifted QR iteration).
    const double lead = p[static_cast<size_t>(deg)];
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 0; i < deg - 1; ++i) companion(i + 1, i) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -p[static_cast<size_t>(i)] / lead;

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> roots(static_cast<size_t>(deg));
    for (int i = 0; i < deg; ++i) roots[static_cast<size_t>(i)] = solver.eigenvalues()(i);

    // One Newton step per root tightens the residual.
    std::vector<double> monic(p.begin(), p.begin() + deg + 1);
    for (double& v : monic) v /= lead;
    for (auto& root : roots) {
        const std::complex<double> d = poly_derivative_eval(monic, root);
        if (std::abs(d) > 1e-12) {
            const std::complex<double> polished = root - poly_eval(monic, root) / d;
            if (std::abs(poly_eval(monic, polished)) < std::abs(poly_eval(monic, root)))
                root = polished;
        }
    }
    std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

}  // namespace tracker
