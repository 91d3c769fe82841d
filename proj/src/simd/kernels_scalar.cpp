#include "synthts/simd/kernels.hpp"

namespace synthts::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void leaky_relu(const double* x, double* y, std::size_t n, double slope) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] >= 0.0 ? x[i] : slope * x[i];
}

void leaky_relu_backward(const double* x, const double* g_out, double* g_in, std::size_t n,
                         double slope) {
  for (std::size_t i = 0; i < n; ++i) g_in[i] = x[i] >= 0.0 ? g_out[i] : slope * g_out[i];
}

}  // namespace

const KernelTable scalar_table{dot, axpy, sum_sq_diff, leaky_relu, leaky_relu_backward};

}  // namespace synthts::simd::detail
