#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace khypo {

// Small fixed-capacity vectors/matrices (d <= 3) so hot loops never allocate.
constexpr int kMaxDim = 3;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using cplx = std::complex<double>;

// ---- error taxonomy --------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class InvalidArgument : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class DegeneracyError : public Error { public: using Error::Error; };
class AccuracyError : public Error { public: using Error::Error; };
class ConsistencyError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

[[noreturn]] void fail_invalid(const std::string& where, const std::string& what);

inline void require(bool cond, const std::string& where, const std::string& what) {
    if (!cond) fail_invalid(where, what);
}

// ---- threading -------------------------------------------------------------

// Global worker count; 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs fn(i) for i in [0,n). Work is split in contiguous blocks; callers write
// results into index-addressed slots so the outcome never depends on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// ---- deterministic reductions ----------------------------------------------

double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }
cplx pairwise_sum(const cplx* x, std::size_t n);

// ---- misc ------------------------------------------------------------------

constexpr double kPi = 3.14159265358979323846264338327950288;

inline bool all_finite(const Vec& v) { return v.allFinite(); }

// Surface area of the unit sphere S^{d-1} (counting measure for d = 1).
double sphere_area(int d);

std::string version_string();

}  // namespace khypo
