#pragma once

#include <cstddef>

// Vector primitives behind the training / solver inner loops.
// A scalar reference implementation always exists; an AVX2+FMA variant is
// compiled on x86-64 and selected once at startup when the CPU supports it.
// Override with HFL_KERNEL_BACKEND=scalar|avx2 (useful for A/B testing).

namespace hfl::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name(Backend b);

// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);
// x *= a
void scal(double a, double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
// sum_i |x_i - y_i|
double l1_dist(const double* x, const double* y, std::size_t n);
// sum_i (x_i - y_i)^2
double l2_dist_sq(const double* x, const double* y, std::size_t n);
// max_i |x_i - y_i|
double max_abs_diff(const double* x, const double* y, std::size_t n);

// Reference kernels, exposed so the dispatched variants can be equivalence-tested.
namespace scalar_impl {
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double l1_dist(const double* x, const double* y, std::size_t n);
double l2_dist_sq(const double* x, const double* y, std::size_t n);
double max_abs_diff(const double* x, const double* y, std::size_t n);
}  // namespace scalar_impl

namespace avx2_impl {
bool compiled();   // true when this build carries the AVX2 variants
bool supported();  // true when the running CPU can execute them
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double l1_dist(const double* x, const double* y, std::size_t n);
double l2_dist_sq(const double* x, const double* y, std::size_t n);
double max_abs_diff(const double* x, const double* y, std::size_t n);
}  // namespace avx2_impl

}  // namespace hfl::kernels
