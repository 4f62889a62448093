#include "khypo/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Eigenvalues>

namespace khypo::quad {

Rule gauss_legendre(int n) {
    require(n >= 1, "quadrature.gauss_legendre", "n must be >= 1");
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    if (n == 1) {
        r.x[0] = 0.0;
        r.w[0] = 2.0;
        return r;
    }
    auto legendre = [n](double z, double& dp) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        return p1;
    };
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            const double dz = legendre(z, dp) / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        legendre(z, dp);
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

const Rule& gauss_legendre_cached(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<Rule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<Rule>(gauss_legendre(n));
    return *slot;
}

static Rule golub_welsch(const std::vector<double>& diag, const std::vector<double>& off, double mu0) {
    const int n = static_cast<int>(diag.size());
    Eigen::VectorXd d(n), e(std::max(n - 1, 0));
    for (int i = 0; i < n; ++i) d(i) = diag[i];
    for (int i = 0; i + 1 < n; ++i) e(i) = off[i];
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    if (n == 1) {
        r.x[0] = diag[0];
        r.w[0] = mu0;
        return r;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    for (int i = 0; i < n; ++i) {
        r.x[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        r.w[i] = mu0 * v0 * v0;
    }
    return r;
}

Rule gauss_jacobi(int n, double a, double b) {
    require(n >= 1, "quadrature.gauss_jacobi", "n must be >= 1");
    require(a > -1.0 && b > -1.0, "quadrature.gauss_jacobi", "exponents must exceed -1");
    std::vector<double> diag(n), off(std::max(n - 1, 0));
    const double ab = a + b;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * k + ab;
        if (k == 0)
            diag[k] = (b - a) / (ab + 2.0);
        else
            diag[k] = (b * b - a * a) / (t * (t + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        const double t = 2.0 * k + ab;
        double beta;
        if (k == 1)
            beta = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
        else
            beta = 4.0 * k * (k + a) * (k + b) * (k + ab) / (t * t * (t + 1.0) * (t - 1.0));
        off[k - 1] = std::sqrt(beta);
    }
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                                std::lgamma(ab + 2.0));
    return golub_welsch(diag, off, mu0);
}

Rule gauss_hermite(int n) {
    require(n >= 1, "quadrature.gauss_hermite", "n must be >= 1");
    std::vector<double> diag(n, 0.0), off(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(0.5 * k);
    Rule r = golub_welsch(diag, off, std::sqrt(kPi));
    // symmetrize away eigen-solver noise
    for (int i = 0; i < n / 2; ++i) {
        const double x = 0.5 * (r.x[n - 1 - i] - r.x[i]);
        const double w = 0.5 * (r.w[n - 1 - i] + r.w[i]);
        r.x[i] = -x;
        r.x[n - 1 - i] = x;
        r.w[i] = r.w[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.x[n / 2] = 0.0;
    return r;
}

Rule radial_power_rule(int n, double p, double R) {
    Rule ref = gauss_jacobi(n, 0.0, p);
    Rule r;
    r.x.resize(n);
    r.w.resize(n);
    const double scale = std::pow(0.5 * R, p + 1.0);
    for (int i = 0; i < n; ++i) {
        r.x[i] = 0.5 * R * (1.0 + ref.x[i]);
        r.w[i] = ref.w[i] * scale;
    }
    return r;
}

Rule map_rule(const Rule& ref, double a, double b) {
    Rule r;
    r.x.resize(ref.size());
    r.w.resize(ref.size());
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (std::size_t i = 0; i < ref.size(); ++i) {
        r.x[i] = c + h * ref.x[i];
        r.w[i] = h * ref.w[i];
    }
    return r;
}

Rule composite_gl(double a, double b, int panels, int n) {
    require(panels >= 1, "quadrature.composite_gl", "panels must be >= 1");
    const Rule& ref = gauss_legendre_cached(n);
    Rule r;
    r.x.reserve(static_cast<std::size_t>(panels) * n);
    r.w.reserve(static_cast<std::size_t>(panels) * n);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h, hi = (p + 1 == panels) ? b : a + (p + 1) * h;
        const double c = 0.5 * (lo + hi), hh = 0.5 * (hi - lo);
        for (int i = 0; i < n; ++i) {
            r.x.push_back(c + hh * ref.x[i]);
            r.w.push_back(hh * ref.w[i]);
        }
    }
    return r;
}

}  // namespace khypo::quad
