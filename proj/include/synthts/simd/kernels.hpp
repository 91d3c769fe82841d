#pragma once

// Vector kernels behind the network and statistics code.
//
// Each kernel has a scalar reference implementation and, where the build
// target allows it, an AVX2 (x86-64) or NEON (aarch64) variant. The variant is
// chosen once at first use from the running CPU's capabilities and can be
// pinned with set_backend(). Elementwise kernels (axpy, leaky_relu*) are
// bit-identical across backends; reductions (dot, sum_sq_diff) differ only in
// summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace synthts::simd {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // sum (a - b)^2
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  void (*leaky_relu)(const double* x, double* y, std::size_t n, double slope);
  // g_in = g_out * (x >= 0 ? 1 : slope)
  void (*leaky_relu_backward)(const double* x, const double* g_out, double* g_in, std::size_t n,
                              double slope);
};

bool available(Backend b) noexcept;
std::string_view backend_name(Backend b) noexcept;
/// Backend in use for the free functions below.
Backend active_backend() noexcept;
/// Pin the backend; throws InvalidArgument if the CPU or build lacks it.
void set_backend(Backend b);
/// Reset to the best backend for this CPU.
void reset_backend() noexcept;
/// Table for a specific backend, for equivalence testing.
const KernelTable& table(Backend b);
const KernelTable& active() noexcept;

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double a, std::span<const double> x, std::span<double> y);
double sum_sq_diff(std::span<const double> a, std::span<const double> b);
void leaky_relu(std::span<const double> x, std::span<double> y, double slope);
void leaky_relu_backward(std::span<const double> x, std::span<const double> g_out,
                         std::span<double> g_in, double slope);

namespace detail {
extern const KernelTable scalar_table;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable avx2_table;
#endif
#if defined(__aarch64__)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace synthts::simd
