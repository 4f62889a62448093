#include "khypo/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace khypo {

void fail_invalid(const std::string& where, const std::string& what) {
    throw InvalidArgument(where + ": " + what);
}

namespace {
std::atomic<unsigned> g_threads{0};
}

void set_thread_count(unsigned n) { g_threads.store(n); }

unsigned thread_count() {
    unsigned n = g_threads.load();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr first_error;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

template <class T>
static T pairwise_impl(const T* x, std::size_t n) {
    if (n <= 16) {
        T s{};
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_impl(x, h) + pairwise_impl(x + h, n - h);
}

double pairwise_sum(const double* x, std::size_t n) { return pairwise_impl(x, n); }
cplx pairwise_sum(const cplx* x, std::size_t n) { return pairwise_impl(x, n); }

double sphere_area(int d) {
    // |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2); d = 1 gives the two-point count.
    return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

std::string version_string() { return KHYPO_VERSION; }

}  // namespace khypo
