#include "hfl/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#if defined(__x86_64__) || defined(_M_X64)
#define HFL_KERNELS_X86 1
#include <immintrin.h>
#else
#define HFL_KERNELS_X86 0
#endif

namespace hfl::kernels {

//==============================================================
// scalar reference kernels
//==============================================================

namespace scalar_impl {

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double l1_dist(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::fabs(x[i] - y[i]);
    return s;
}

double l2_dist_sq(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

double max_abs_diff(const double* x, const double* y, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::fabs(x[i] - y[i]);
        if (d > m) m = d;
    }
    return m;
}

}  // namespace scalar_impl

//==============================================================
// AVX2+FMA kernels: 4-wide main loop, scalar remainder
//==============================================================

namespace avx2_impl {

#if HFL_KERNELS_X86

bool compiled() { return true; }

bool supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

__attribute__((target("avx2,fma")))
void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2,fma")))
void scal(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

// lanes are reduced in a fixed order so results are run-to-run stable
__attribute__((target("avx2,fma")))
static inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

__attribute__((target("avx2,fma")))
double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

__attribute__((target("avx2,fma")))
double l1_dist(const double* x, const double* y, std::size_t n) {
    const __m256d signmask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(signmask, d));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += std::fabs(x[i] - y[i]);
    return s;
}

__attribute__((target("avx2,fma")))
double l2_dist_sq(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = x[i] - y[i];
        s += d * d;
    }
    return s;
}

__attribute__((target("avx2,fma")))
double max_abs_diff(const double* x, const double* y, std::size_t n) {
    const __m256d signmask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_max_pd(acc, _mm256_andnot_pd(signmask, d));
    }
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    lo = _mm_max_pd(lo, hi);
    double m = _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
    for (; i < n; ++i) {
        const double d = std::fabs(x[i] - y[i]);
        if (d > m) m = d;
    }
    return m;
}

#else  // !HFL_KERNELS_X86

bool compiled() { return false; }
bool supported() { return false; }
void axpy(double a, const double* x, double* y, std::size_t n) { scalar_impl::axpy(a, x, y, n); }
void scal(double a, double* x, std::size_t n) { scalar_impl::scal(a, x, n); }
double dot(const double* x, const double* y, std::size_t n) { return scalar_impl::dot(x, y, n); }
double l1_dist(const double* x, const double* y, std::size_t n) { return scalar_impl::l1_dist(x, y, n); }
double l2_dist_sq(const double* x, const double* y, std::size_t n) { return scalar_impl::l2_dist_sq(x, y, n); }
double max_abs_diff(const double* x, const double* y, std::size_t n) { return scalar_impl::max_abs_diff(x, y, n); }

#endif

}  // namespace avx2_impl

//==============================================================
// runtime dispatch
//==============================================================

static Backend pick_backend() {
    if (const char* env = std::getenv("HFL_KERNEL_BACKEND")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!avx2_impl::compiled() || !avx2_impl::supported())
                throw std::runtime_error("HFL_KERNEL_BACKEND=avx2 but AVX2 is unavailable");
            return Backend::avx2;
        }
        throw std::runtime_error("HFL_KERNEL_BACKEND must be 'scalar' or 'avx2'");
    }
    return (avx2_impl::compiled() && avx2_impl::supported()) ? Backend::avx2 : Backend::scalar;
}

Backend active_backend() {
    static const Backend b = pick_backend();
    return b;
}

const char* backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    if (active_backend() == Backend::avx2) return avx2_impl::axpy(a, x, y, n);
    scalar_impl::axpy(a, x, y, n);
}

void scal(double a, double* x, std::size_t n) {
    if (active_backend() == Backend::avx2) return avx2_impl::scal(a, x, n);
    scalar_impl::scal(a, x, n);
}

double dot(const double* x, const double* y, std::size_t n) {
    if (active_backend() == Backend::avx2) return avx2_impl::dot(x, y, n);
    return scalar_impl::dot(x, y, n);
}

double l1_dist(const double* x, const double* y, std::size_t n) {
    if (active_backend() == Backend::avx2) return avx2_impl::l1_dist(x, y, n);
    return scalar_impl::l1_dist(x, y, n);
}

double l2_dist_sq(const double* x, const double* y, std::size_t n) {
    if (active_backend() == Backend::avx2) return avx2_impl::l2_dist_sq(x, y, n);
    return scalar_impl::l2_dist_sq(x, y, n);
}

double max_abs_diff(const double* x, const double* y, std::size_t n) {
    if (active_backend() == Backend::avx2) return avx2_impl::max_abs_diff(x, y, n);
    return scalar_impl::max_abs_diff(x, y, n);
}

}  // namespace hfl::kernels
