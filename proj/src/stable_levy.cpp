#include "khypo/stable_levy.hpp"

#include "khypo/quadrature.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>

namespace khypo {

namespace {

constexpr double kDirTol = 1e-12;

Vec cross3(const Vec& a, const Vec& b) {
    Vec c(3);
    c << a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0);
    return c;
}

Vec normalized_direction(const Vec& d, const char* where) {
    require(d.allFinite(), where, "atom direction must be finite");
    const double n = d.norm();
    require(std::abs(n - 1.0) <= 1e-6, where, "atom direction must be a unit vector");
    return d / n;
}

}  // namespace

StableMeasure::StableMeasure(double alpha, int dim, std::vector<Atom> atoms, double iso_weight)
    : alpha_(alpha), dim_(dim), atoms_(std::move(atoms)), iso_(iso_weight) {
    const char* where = "stable_levy.StableMeasure";
    require(std::isfinite(alpha) && alpha > 0.0 && alpha < 2.0, where, "alpha must lie in (0,2)");
    require(dim >= 1 && dim <= kMaxDim, where, "dim must be 1, 2 or 3");
    require(std::isfinite(iso_weight) && iso_weight >= 0.0, where, "iso_weight must be >= 0");
    for (auto& a : atoms_) {
        require(a.dir.size() == dim, where, "atom direction has wrong dimension");
        require(std::isfinite(a.weight) && a.weight >= 0.0, where, "atom weights must be >= 0");
        a.dir = normalized_direction(a.dir, where);
    }
    // every (θ,w) needs a partner (-θ,w)
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        bool found = false;
        for (std::size_t j = 0; j < atoms_.size() && !found; ++j) {
            if ((atoms_[i].dir + atoms_[j].dir).norm() <= kDirTol &&
                std::abs(atoms_[i].weight - atoms_[j].weight) <= kDirTol * std::max(1.0, atoms_[i].weight))
                found = true;
        }
        require(found, where, "measure is not symmetric: atom without a mirrored partner of equal weight");
    }
    require(total_mass() > 0.0, where, "total spherical mass must be positive");
}

StableMeasure StableMeasure::isotropic(double alpha, int dim, double iso_weight) {
    return StableMeasure(alpha, dim, {}, iso_weight);
}

double StableMeasure::total_mass() const {
    double m = iso_ * sphere_area(dim_);
    for (const auto& a : atoms_) m += a.weight;
    return m;
}

StableMeasure StableMeasure::scaled(double c) const {
    std::vector<Atom> at = atoms_;
    for (auto& a : at) a.weight *= c;
    return StableMeasure(alpha_, dim_, std::move(at), iso_ * c);
}

double StableMeasure::projection_moment(const Vec& theta0) const {
    double s = iso_ > 0.0 ? iso_ * sphere_moment(dim_, alpha_) : 0.0;
    for (const auto& a : atoms_) s += a.weight * std::pow(std::abs(theta0.dot(a.dir)), alpha_);
    return s;
}

std::vector<Atom> StableMeasure::paired_atoms() const {
    std::vector<Atom> out;
    std::vector<bool> used(atoms_.size(), false);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
            if (!used[j] && (atoms_[i].dir + atoms_[j].dir).norm() <= kDirTol) {
                used[j] = true;
                break;
            }
        }
        if (atoms_[i].weight > 0.0) out.push_back({atoms_[i].dir, 2.0 * atoms_[i].weight});
    }
    return out;
}

// ---- constants -------------------------------------------------------------

namespace {

double compute_stable_constant(double alpha) {
    // 2∫(1-cos s)s^{-1-α}ds = (2/Γ(1+α)) ∫_0^∞ t^{α-1}/(1+t²) dt, t = e^u.
    auto g = [alpha](double u) {
        return u <= 0.0 ? std::exp(alpha * u) / (1.0 + std::exp(2.0 * u))
                        : std::exp((alpha - 2.0) * u) / (1.0 + std::exp(-2.0 * u));
    };
    const double lo = (std::log(1e-18) + std::log(alpha)) / alpha;
    const double hi = (std::log(1e-18) + std::log(2.0 - alpha)) / (alpha - 2.0);
    double sum = 0.0;
    // split at 0 so each side is monotone
    for (auto [a, b] : {std::pair{lo, 0.0}, std::pair{0.0, hi}}) {
        auto r = quad::integrate_adaptive<double>(g, a, b, 1e-14, 0.0, 4000);
        sum += r.value;
    }
    return 2.0 * sum / std::tgamma(1.0 + alpha);
}

double compute_sphere_moment(int d, double alpha) {
    switch (d) {
        case 1:
            return 2.0;
        case 2: {
            // 4∫_0^{π/2} sin^α ψ dψ with the ψ^α factor absorbed by Gauss–Jacobi
            auto rule = quad::radial_power_rule(48, alpha, 0.5 * kPi);
            double s = 0.0;
            for (std::size_t i = 0; i < rule.size(); ++i) {
                const double p = rule.x[i];
                s += rule.w[i] * std::pow(std::sin(p) / p, alpha);
            }
            return 4.0 * s;
        }
        case 3:
            // 2π ∫_{-1}^{1} |u|^α du
            return 4.0 * kPi / (1.0 + alpha);
        default:
            throw DomainError("stable_levy.sphere_moment: d must be 1, 2 or 3");
    }
}

template <class F>
double cached(std::map<std::pair<int, std::uint64_t>, double>& cache, std::mutex& mu, int d, double alpha,
              F&& compute) {
    const auto key = std::make_pair(d, std::bit_cast<std::uint64_t>(alpha));
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    const double v = compute();
    std::lock_guard<std::mutex> lock(mu);
    cache[key] = v;
    return v;
}

}  // namespace

double stable_constant(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("stable_levy.stable_constant: alpha must lie in (0,2)");
    static std::mutex mu;
    static std::map<std::pair<int, std::uint64_t>, double> cache;
    return cached(cache, mu, 0, alpha, [&] { return compute_stable_constant(alpha); });
}

double sphere_moment(int d, double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("stable_levy.sphere_moment: alpha must lie in (0,2)");
    if (d < 1 || d > 3) throw DomainError("stable_levy.sphere_moment: d must be 1, 2 or 3");
    static std::mutex mu;
    static std::map<std::pair<int, std::uint64_t>, double> cache;
    return cached(cache, mu, d, alpha, [&] { return compute_sphere_moment(d, alpha); });
}

double frac_constant(int d, double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("stable_levy.frac_constant: alpha must lie in (0,2)");
    if (d < 1 || d > 3) throw DomainError("stable_levy.frac_constant: d must be 1, 2 or 3");
    return stable_constant(alpha) * sphere_moment(d, alpha);
}

// ---- symbol ----------------------------------------------------------------

LevySymbol::LevySymbol(StableMeasure m, Mat sigma) : m_(std::move(m)), sigma_(std::move(sigma)) {
    const int d = m_.dim();
    require(sigma_.rows() == d && sigma_.cols() == d, "stable_levy.LevySymbol", "sigma has wrong shape");
    require(sigma_.allFinite(), "stable_levy.LevySymbol", "sigma must be finite");
    c_alpha_ = stable_constant(m_.alpha());
    iso_coeff_ = m_.iso_weight() > 0.0 ? c_alpha_ * m_.iso_weight() * sphere_moment(d, m_.alpha()) : 0.0;
    for (const auto& a : m_.paired_atoms()) pairs_.push_back({Vec(sigma_ * a.dir), c_alpha_ * a.weight});
}

double LevySymbol::operator()(const Vec& xi) const {
    require(xi.size() == m_.dim(), "stable_levy.eval_symbol", "xi has wrong dimension");
    require(xi.allFinite(), "stable_levy.eval_symbol", "xi must be finite");
    const double a = m_.alpha();
    double s = 0.0;
    if (iso_coeff_ > 0.0) {
        const Vec z = sigma_.transpose() * xi;
        s += iso_coeff_ * std::pow(z.norm(), a);
    }
    for (const auto& p : pairs_) s += p.weight * std::pow(std::abs(xi.dot(p.dir)), a);
    return s;
}

double LevySymbol::kappa1(int grid_size) const {
    const auto nd = check_nondegenerate(m_, grid_size);
    if (!nd.is_nondegenerate) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(sigma_)};
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double a = m_.alpha();
    double high = m_.iso_weight() > 0.0 ? m_.iso_weight() * sphere_moment(m_.dim(), a) : 0.0;
    for (const auto& at : m_.atoms()) high += at.weight;
    const double lower = c_alpha_ * nd.kappa_low * (1.0 - 1e-8) * std::pow(smin, a);
    const double upper = c_alpha_ * high * std::pow(smax, a);
    return std::min(lower, 1.0 / upper);
}

double eval_symbol(const LevySymbol& sym, const Vec& xi) { return sym(xi); }

// ---- non-degeneracy --------------------------------------------------------

std::vector<Vec> sphere_directions(int d, int n) {
    std::vector<Vec> out;
    if (d == 1) {
        Vec e(1);
        e(0) = 1.0;
        out.push_back(e);
        out.push_back(-e);
        return out;
    }
    if (d == 2) {
        for (int k = 0; k < n; ++k) {
            const double phi = 2.0 * kPi * k / n;
            Vec e(2);
            e << std::cos(phi), std::sin(phi);
            out.push_back(e);
        }
        return out;
    }
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
        const double z = 1.0 - (2.0 * k + 1.0) / n;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        Vec e(3);
        e << r * std::cos(golden * k), r * std::sin(golden * k), z;
        out.push_back(e);
    }
    return out;
}

NondegeneracyResult check_nondegenerate(const StableMeasure& m, int grid_size) {
    require(grid_size >= 64, "stable_levy.check_nondegenerate", "grid_size must be >= 64");
    const int d = m.dim();
    auto f = [&](const Vec& th) { return m.projection_moment(th); };
    double best = std::numeric_limits<double>::infinity();
    if (d == 1) {
        Vec e(1);
        e(0) = 1.0;
        best = f(e);
    } else if (d == 2) {
        auto at = [&](double phi) {
            Vec e(2);
            e << std::cos(phi), std::sin(phi);
            return f(e);
        };
        // half circle suffices (θ0 and -θ0 agree)
        std::vector<double> vals(grid_size);
        for (int k = 0; k < grid_size; ++k) vals[k] = at(kPi * k / grid_size);
        for (double v : vals) best = std::min(best, v);
        for (const auto& a : m.atoms()) best = std::min(best, at(std::atan2(a.dir(1), a.dir(0)) + 0.5 * kPi));
        // golden-section refinement around the three smallest samples
        std::vector<int> idx(grid_size);
        for (int k = 0; k < grid_size; ++k) idx[k] = k;
        std::partial_sort(idx.begin(), idx.begin() + 3, idx.end(), [&](int l, int r) { return vals[l] < vals[r]; });
        const double h = kPi / grid_size;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int j = 0; j < 3; ++j) {
            double lo = kPi * idx[j] / grid_size - h, hi = lo + 2.0 * h;
            double c = hi - gr * (hi - lo), e = lo + gr * (hi - lo);
            double fc = at(c), fe = at(e);
            for (int it = 0; it < 80; ++it) {
                if (fc < fe) {
                    hi = e, e = c, fe = fc;
                    c = hi - gr * (hi - lo), fc = at(c);
                } else {
                    lo = c, c = e, fc = fe;
                    e = lo + gr * (hi - lo), fe = at(e);
                }
            }
            best = std::min({best, fc, fe});
        }
    } else {
        std::vector<Vec> dirs = sphere_directions(3, std::max(grid_size, 64));
        const auto& atoms = m.atoms();
        for (std::size_t i = 0; i < atoms.size(); ++i)
            for (std::size_t j = i + 1; j < atoms.size(); ++j) {
                Vec c = cross3(atoms[i].dir, atoms[j].dir);
                if (c.norm() > 1e-12) dirs.push_back(c / c.norm());
            }
        Vec arg = dirs[0];
        for (const auto& e : dirs) {
            const double v = f(e);
            if (v < best) best = v, arg = e;
        }
        // pattern search on the sphere from the best sample
        double step = 0.2;
        while (step > 1e-10) {
            bool improved = false;
            for (int k = 0; k < 3 && !improved; ++k)
                for (double sgn : {1.0, -1.0}) {
                    Vec t = arg;
                    t(k) += sgn * step;
                    t /= t.norm();
                    const double v = f(t);
                    if (v < best) {
                        best = v, arg = t, improved = true;
                        break;
                    }
                }
            if (!improved) step *= 0.5;
        }
    }
    NondegeneracyResult r;
    r.kappa_low = std::max(best, 0.0);
    r.is_nondegenerate = r.kappa_low > 1e-10;
    if (!r.is_nondegenerate) r.kappa_low = 0.0;
    return r;
}

bool measure_leq(const StableMeasure& m1, const StableMeasure& m2) {
    require(m1.dim() == m2.dim(), "stable_levy.measure_leq", "dimension mismatch");
    require(m1.alpha() == m2.alpha(), "stable_levy.measure_leq", "alpha mismatch");
    if (m1.iso_weight() > m2.iso_weight()) return false;
    for (const auto& a : m1.atoms()) {
        if (a.weight <= 0.0) continue;
        double w2 = 0.0;
        bool matched = false;
        for (const auto& b : m2.atoms())
            if ((a.dir - b.dir).norm() <= kDirTol) w2 += b.weight, matched = true;
        if (!matched || a.weight > w2) return false;
    }
    return true;
}

}  // namespace khypo
