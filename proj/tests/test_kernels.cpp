#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "hfl/common.hpp"
#include "hfl/kernels.hpp"

using namespace hfl;
namespace k = hfl::kernels;

namespace {

std::vector<double> random_vec(Rng& rng, size_t n, double scale = 3.0) {
    std::vector<double> v(n);
    for (double& x : v) x = (rng.unit() * 2.0 - 1.0) * scale;
    return v;
}

}  // namespace

TEST_CASE("scalar kernels against hand-computed values") {
    const double x[3] = {1.0, -2.0, 0.5};
    const double yv[3] = {4.0, 1.0, -1.5};

    double y[3] = {4.0, 1.0, -1.5};
    k::scalar_impl::axpy(2.0, x, y, 3);
    CHECK(y[0] == 6.0);
    CHECK(y[1] == -3.0);
    CHECK(y[2] == -0.5);

    double z[3] = {1.0, -2.0, 0.5};
    k::scalar_impl::scal(-3.0, z, 3);
    CHECK(z[0] == -3.0);
    CHECK(z[1] == 6.0);
    CHECK(z[2] == -1.5);

    CHECK(k::scalar_impl::dot(x, yv, 3) == 4.0 - 2.0 - 0.75);
    CHECK(k::scalar_impl::l1_dist(x, yv, 3) == 3.0 + 3.0 + 2.0);
    CHECK(k::scalar_impl::l2_dist_sq(x, yv, 3) == 9.0 + 9.0 + 4.0);
    CHECK(k::scalar_impl::max_abs_diff(x, yv, 3) == 3.0);
}

TEST_CASE("zero-length inputs are identities") {
    CHECK(k::scalar_impl::dot(nullptr, nullptr, 0) == 0.0);
    CHECK(k::scalar_impl::l1_dist(nullptr, nullptr, 0) == 0.0);
    CHECK(k::scalar_impl::l2_dist_sq(nullptr, nullptr, 0) == 0.0);
    CHECK(k::scalar_impl::max_abs_diff(nullptr, nullptr, 0) == 0.0);
    CHECK(k::dot(nullptr, nullptr, 0) == 0.0);
}

TEST_CASE("avx2 variants match scalar reference") {
    if (!(k::avx2_impl::compiled() && k::avx2_impl::supported())) {
        MESSAGE("avx2 unavailable; equivalence not exercised here");
        return;
    }
    Rng rng(7);
    // lengths straddling the vector width to cover every remainder path
    for (size_t n : {size_t(0), size_t(1), size_t(2), size_t(3), size_t(4), size_t(5), size_t(7),
                     size_t(8), size_t(9), size_t(15), size_t(16), size_t(17), size_t(100),
                     size_t(1023)}) {
        const std::vector<double> a = random_vec(rng, n);
        const std::vector<double> b = random_vec(rng, n);

        // reductions may reassociate; fma may tighten one rounding per element
        const double tol = 1e-12 * (1.0 + static_cast<double>(n));

        CHECK(std::fabs(k::avx2_impl::dot(a.data(), b.data(), n) -
                        k::scalar_impl::dot(a.data(), b.data(), n)) <= tol);
        CHECK(std::fabs(k::avx2_impl::l1_dist(a.data(), b.data(), n) -
                        k::scalar_impl::l1_dist(a.data(), b.data(), n)) <= tol);
        CHECK(std::fabs(k::avx2_impl::l2_dist_sq(a.data(), b.data(), n) -
                        k::scalar_impl::l2_dist_sq(a.data(), b.data(), n)) <= tol);
        // identical comparisons, no arithmetic: exact
        CHECK(k::avx2_impl::max_abs_diff(a.data(), b.data(), n) ==
              k::scalar_impl::max_abs_diff(a.data(), b.data(), n));

        std::vector<double> y1 = b, y2 = b;
        k::avx2_impl::axpy(0.37, a.data(), y1.data(), n);
        k::scalar_impl::axpy(0.37, a.data(), y2.data(), n);
        for (size_t i = 0; i < n; ++i) CHECK(std::fabs(y1[i] - y2[i]) <= 1e-14);

        std::vector<double> s1 = a, s2 = a;
        k::avx2_impl::scal(-1.75, s1.data(), n);
        k::scalar_impl::scal(-1.75, s2.data(), n);
        CHECK(s1 == s2);  // multiply only, same rounding
    }
}

TEST_CASE("dispatched entry points agree with the reference") {
    Rng rng(11);
    const size_t n = 37;
    const std::vector<double> a = random_vec(rng, n);
    const std::vector<double> b = random_vec(rng, n);
    CHECK(std::fabs(k::dot(a.data(), b.data(), n) - k::scalar_impl::dot(a.data(), b.data(), n)) <=
          1e-12);
    CHECK(k::max_abs_diff(a.data(), b.data(), n) ==
          k::scalar_impl::max_abs_diff(a.data(), b.data(), n));
}

TEST_CASE("backend selection is reported and honors the environment override") {
    const k::Backend active = k::active_backend();
    CHECK((active == k::Backend::scalar || active == k::Backend::avx2));
    CHECK(std::string(k::backend_name(k::Backend::scalar)) == "scalar");
    CHECK(std::string(k::backend_name(k::Backend::avx2)) == "avx2");
    if (const char* env = std::getenv("HFL_KERNEL_BACKEND")) {
        CHECK(std::string(k::backend_name(active)) == env);
    } else if (k::avx2_impl::compiled() && k::avx2_impl::supported()) {
        CHECK(active == k::Backend::avx2);
    } else {
        CHECK(active == k::Backend::scalar);
    }
}
