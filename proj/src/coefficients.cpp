#include "khypo/coefficients.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace khypo {

double op_norm(const Mat& m) {
    if (m.rows() == 1) return std::abs(m(0, 0));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(m)};
    return svd.singularValues()(0);
}

static double condition_number(const Mat& m) {
    if (m.rows() == 1) return m(0, 0) == 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(m)};
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    return smin == 0.0 ? std::numeric_limits<double>::infinity() : s(0) / smin;
}

double SymbolKernel::operator()(const Vec& zeta) const {
    if (zeta.size() == 1) return scalar_coeff * std::pow(std::abs(zeta(0)), alpha);
    double s = 0.0;
    if (iso_coeff > 0.0) s += iso_coeff * std::pow((sigma_t * zeta).norm(), alpha);
    for (const auto& p : pairs) s += p.weight * std::pow(std::abs(zeta.dot(p.dir)), alpha);
    return s;
}

static SymbolKernel make_kernel(const StableMeasure& nu, const Mat& sigma) {
    SymbolKernel k;
    k.alpha = nu.alpha();
    const double c = stable_constant(nu.alpha());
    const int d = nu.dim();
    k.sigma_t = sigma.transpose();
    k.iso_coeff = nu.iso_weight() > 0.0 ? c * nu.iso_weight() * sphere_moment(d, nu.alpha()) : 0.0;
    for (const auto& a : nu.paired_atoms()) k.pairs.push_back({Vec(sigma * a.dir), c * a.weight});
    if (d == 1) {
        // every direction is ±1: ψ(ζ) = c |σζ|^α (2 iso + Σ w)
        double mass = 2.0 * nu.iso_weight();
        for (const auto& a : nu.atoms()) mass += a.weight;
        k.scalar_coeff = c * mass * std::pow(std::abs(sigma(0, 0)), nu.alpha());
    }
    return k;
}

CoefficientPath::CoefficientPath(std::vector<double> breakpoints, std::vector<Mat> sigma, std::vector<Mat> U,
                                 std::vector<StableMeasure> nu, std::optional<Envelopes> env)
    : bp_(std::move(breakpoints)), sigma_(std::move(sigma)), U_(std::move(U)), nu_(std::move(nu)),
      env_(std::move(env)) {
    const char* where = "coefficients.CoefficientPath";
    require(!bp_.empty(), where, "at least one breakpoint is required");
    for (std::size_t i = 0; i < bp_.size(); ++i) {
        require(std::isfinite(bp_[i]), where, "breakpoints must be finite");
        if (i > 0) require(bp_[i] > bp_[i - 1], where, "breakpoints must be strictly increasing");
    }
    const std::size_t n = bp_.size();
    require(sigma_.size() == n && U_.size() == n && nu_.size() == n, where,
            "sigma, U and nu need one value per breakpoint");
    d_ = nu_.front().dim();
    const double alpha = nu_.front().alpha();
    for (std::size_t k = 0; k < n; ++k) {
        require(nu_[k].dim() == d_ && nu_[k].alpha() == alpha, where, "all measures must share alpha and dim");
        require(sigma_[k].rows() == d_ && sigma_[k].cols() == d_ && U_[k].rows() == d_ && U_[k].cols() == d_,
                where, "matrix shape does not match dim");
        require(sigma_[k].allFinite() && U_[k].allFinite(), where, "matrices must be finite");
        if (condition_number(sigma_[k]) > 1e8 || condition_number(U_[k]) > 1e8) {
            std::ostringstream os;
            os << where << ": sigma or U on piece " << k << " is singular or has condition number > 1e8";
            throw DegeneracyError(os.str());
        }
        kernels_.push_back(make_kernel(nu_[k], sigma_[k]));
    }
    if (env_) {
        require(env_->nu1.dim() == d_ && env_->nu2.dim() == d_, where, "envelope dimension mismatch");
        require(env_->nu1.alpha() == alpha && env_->nu2.alpha() == alpha, where, "envelope alpha mismatch");
    }
}

CoefficientPath CoefficientPath::constant(const Mat& sigma, const Mat& U, const StableMeasure& nu,
                                          std::optional<Envelopes> env) {
    return CoefficientPath({0.0}, {sigma}, {U}, {nu}, std::move(env));
}

std::size_t CoefficientPath::piece_at(double t) const {
    const auto it = std::upper_bound(bp_.begin(), bp_.end(), t);
    if (it == bp_.begin()) return 0;
    return static_cast<std::size_t>(it - bp_.begin()) - 1;
}

LevySymbol CoefficientPath::symbol_at(double t) const {
    const std::size_t k = piece_at(t);
    return LevySymbol(nu_[k], sigma_[k]);
}

Mat CoefficientPath::flow(double s, double t) const {
    if (s > t) return -flow(t, s);
    Mat P = Mat::Zero(d_, d_);
    for_each_segment(s, t, [&](double a, double b, std::size_t k) { P += (b - a) * U_[k]; });
    return P;
}

double CoefficientPath::sup_sigma_norm() const {
    double m = 0.0;
    for (const auto& s : sigma_) m = std::max(m, op_norm(s));
    return m;
}

double CoefficientPath::sup_sigma_inv_norm() const {
    double m = 0.0;
    for (const auto& s : sigma_) m = std::max(m, op_norm(Mat(s.inverse())));
    return m;
}

double CoefficientPath::sup_U_norm() const {
    double m = 0.0;
    for (const auto& u : U_) m = std::max(m, op_norm(u));
    return m;
}

bool CoefficientPath::check_sandwich() const {
    if (!env_) return false;
    for (const auto& nu : nu_)
        if (!measure_leq(env_->nu1, nu) || !measure_leq(nu, env_->nu2)) return false;
    return true;
}

Mat flow_matrix(const CoefficientPath& path, double s, double t) { return path.flow(s, t); }

TimeLattice default_lattice(const CoefficientPath& path) {
    std::vector<double> lengths;
    for (int k = -12; k <= 12; ++k) lengths.push_back(std::pow(10.0, k / 4.0));
    TimeLattice lat;
    for (double b : path.breakpoints()) {
        for (double L : lengths) {
            lat.emplace_back(b, b + L);
            lat.emplace_back(b - L, b);
            lat.emplace_back(b - 0.5 * L, b + 0.5 * L);
            lat.emplace_back(b - 0.25 * L, b + 0.75 * L);
        }
    }
    return lat;
}

double kappa0(const CoefficientPath& path, const TimeLattice& lattice) {
    require(!lattice.empty(), "coefficients.kappa0", "lattice must be non-empty");
    double sup = 0.0;
    for (const auto& [s, t] : lattice) {
        require(t > s, "coefficients.kappa0", "lattice pairs need s < t");
        const Mat P = path.flow(s, t);
        const double scale = path.sup_U_norm() * (t - s);
        bool singular = false;
        double inv_norm = 0.0;
        if (P.rows() == 1) {
            singular = std::abs(P(0, 0)) <= 1e-12 * scale;
            if (!singular) inv_norm = 1.0 / std::abs(P(0, 0));
        } else {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(P)};
            const double smin = svd.singularValues()(svd.singularValues().size() - 1);
            singular = smin <= 1e-12 * scale;
            if (!singular) inv_norm = 1.0 / smin;
        }
        if (singular || !std::isfinite((t - s) * inv_norm) || (t - s) * inv_norm > 1e12) {
            std::ostringstream os;
            os.precision(17);
            os << "coefficients.kappa0: flow matrix Pi_{s,t} is singular at (s,t) = (" << s << ", " << t << ")";
            throw DegeneracyError(os.str());
        }
        sup = std::max(sup, (t - s) * inv_norm);
    }
    return path.sup_sigma_norm() + path.sup_sigma_inv_norm() + path.sup_U_norm() + sup;
}

CoefficientPath time_rescale(const CoefficientPath& path, double r, double t0) {
    require(r > 0.0 && std::isfinite(r), "coefficients.time_rescale", "r must be positive");
    const double ra = std::pow(r, path.alpha());
    std::vector<double> bp;
    for (double b : path.breakpoints()) bp.push_back((b - t0) / ra);
    std::vector<Mat> sig, U;
    std::vector<StableMeasure> nu;
    for (std::size_t k = 0; k < path.pieces(); ++k) {
        sig.push_back(path.sigma(k));
        U.push_back(path.U(k));
        nu.push_back(path.nu(k));
    }
    return CoefficientPath(std::move(bp), std::move(sig), std::move(U), std::move(nu), path.envelopes());
}

}  // namespace khypo
