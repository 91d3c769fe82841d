#include <atomic>
#include <string>

#include "synthts/error.hpp"
#include "synthts/simd/kernels.hpp"

namespace synthts::simd {
namespace {

Backend detect() noexcept {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2")) return Backend::avx2;
#elif defined(__aarch64__)
  return Backend::neon;
#endif
  return Backend::scalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> ptr{&table(detect())};
  return ptr;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b)
    throw ShapeError("kernel operands differ in length: " + std::to_string(a) + " vs " +
                     std::to_string(b));
}

}  // namespace

bool available(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& table(Backend b) {
  if (!available(b)) throw InvalidArgument("kernel backend not available: " + std::string(backend_name(b)));
  switch (b) {
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::avx2:
      return detail::avx2_table;
#endif
#if defined(__aarch64__)
    case Backend::neon:
      return detail::neon_table;
#endif
    default:
      return detail::scalar_table;
  }
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

Backend active_backend() noexcept {
  const KernelTable* t = current().load(std::memory_order_relaxed);
  for (Backend b : {Backend::avx2, Backend::neon})
    if (available(b) && t == &table(b)) return b;
  return Backend::scalar;
}

void set_backend(Backend b) { current().store(&table(b), std::memory_order_relaxed); }

void reset_backend() noexcept { current().store(&table(detect()), std::memory_order_relaxed); }

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size());
  active().axpy(a, x.data(), y.data(), x.size());
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return active().sum_sq_diff(a.data(), b.data(), a.size());
}

void leaky_relu(std::span<const double> x, std::span<double> y, double slope) {
  check_sizes(x.size(), y.size());
  active().leaky_relu(x.data(), y.data(), x.size(), slope);
}

void leaky_relu_backward(std::span<const double> x, std::span<const double> g_out,
                         std::span<double> g_in, double slope) {
  check_sizes(x.size(), g_out.size());
  check_sizes(x.size(), g_in.size());
  active().leaky_relu_backward(x.data(), g_out.data(), g_in.data(), x.size(), slope);
}

}  // namespace synthts::simd
