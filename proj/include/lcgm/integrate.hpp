#pragma once

// Integrals of exp(affine) over simplices through divided differences of exp.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lcgm/error.hpp"

namespace lcgm {

/// Below this spread of the node values the Taylor expansion around the mean is used.
inline constexpr double kTaylorSpread = 1e-6;

namespace detail {

/// Divided differences exp[z_a..z_b] for every contiguous run a <= b, by the Taylor
/// series around the mean: exp[z] = e^mean * sum_N h_{N-m}(delta) / N!.
/// `out` is n x n row-major; only the upper triangle is written.
inline void dd_table_taylor(const double* z, std::size_t n, double* out) {
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += z[i];
  mean /= static_cast<double>(n);
  const double scale = std::exp(mean);
  constexpr std::size_t kTerms = 12;
  double h[kTerms];
  for (std::size_t a = 0; a < n; ++a) {
    // h[m] = complete homogeneous symmetric polynomial of degree m in delta[a..b].
    h[0] = 1.0;
    for (std::size_t b = a; b < n; ++b) {
      const double delta = z[b] - mean;
      if (b > a)
        for (std::size_t m = 1; m < kTerms; ++m) h[m] += delta * h[m - 1];
      else
        for (std::size_t m = 1; m < kTerms; ++m) h[m] = delta * h[m - 1];
      const std::size_t order = b - a;
      double fact = 1.0;
      for (std::size_t i = 2; i <= order; ++i) fact *= static_cast<double>(i);
      double sum = 0.0;
      for (std::size_t m = 0; m < kTerms; ++m) {
        sum += h[m] / fact;
        fact *= static_cast<double>(order + m + 1);
      }
      out[a * n + b] = scale * sum;
    }
  }
}

/// exp of the bidiagonal matrix with z on the diagonal and ones above it; entry
/// (a, b) is exp[z_a..z_b]. Scaling and squaring with a Taylor core.
inline void dd_table_matrix(const double* z, std::size_t n, double* out) {
  const double shift = *std::max_element(z, z + n);
  double norm = 1.0;
  for (std::size_t i = 0; i < n; ++i) norm = std::max(norm, std::abs(z[i] - shift) + 1.0);
  int s = 0;
  while (norm > 0.5) {
    norm *= 0.5;
    ++s;
  }
  const double inv = std::ldexp(1.0, -s);
  thread_local std::vector<double> buf;
  buf.assign(n * n + n, 0.0);
  double* tmp = buf.data();
  double* diag = tmp + n * n;
  double* e = out;
  for (std::size_t i = 0; i < n; ++i) diag[i] = (z[i] - shift) * inv;
  // Taylor series of exp(a) in Horner form; norm <= 1/2 so 14 terms reach full precision.
  // a is bidiagonal, so each step a*e costs O(n^2).
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) e[i * n + j] = i == j ? 1.0 : 0.0;
  for (int k = 14; k >= 1; --k) {
    const double f = 1.0 / k;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double v = diag[i] * e[i * n + j];
        if (i + 1 <= j) v += inv * e[(i + 1) * n + j];
        tmp[i * n + j] = v * f;
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) e[i * n + j] = (i == j ? 1.0 : 0.0) + tmp[i * n + j];
  }
  for (int r = 0; r < s; ++r) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = i; k <= j; ++k) acc += e[i * n + k] * e[k * n + j];
        tmp[i * n + j] = acc;
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) e[i * n + j] = tmp[i * n + j];
  }
  const double scale = std::exp(shift);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) e[i * n + j] *= scale;
}

inline void dd_table(const double* z, std::size_t n, double* out) {
  auto [lo, hi] = std::minmax_element(z, z + n);
  if (*hi - *lo < kTaylorSpread)
    dd_table_taylor(z, n, out);
  else
    dd_table_matrix(z, n, out);
}

/// Pairwise summation, so the result does not depend on how work was split.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

inline double factorial_d(std::size_t k) {
  double f = 1.0;
  for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
  return f;
}

/// |det(v_1 - v_0, ..., v_k - v_0)| / k! for k+1 points in R^k.
inline double simplex_volume_d(const std::vector<std::vector<double>>& v) {
  const std::size_t k = v.size() - 1;
  std::vector<std::vector<double>> m(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m[i][j] = v[i + 1][j] - v[0][j];
  double det = 1.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::abs(m[r][c]) > std::abs(m[p][c])) p = r;
    if (m[p][c] == 0.0) return 0.0;
    if (p != c) {
      std::swap(m[p], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < k; ++r) {
      double f = m[r][c] / m[c][c];
      for (std::size_t j = c; j < k; ++j) m[r][j] -= f * m[c][j];
    }
  }
  return std::abs(det) / factorial_d(k);
}

}  // namespace detail

/// exp[z_0, ..., z_m] (repeated nodes allowed).
inline double divided_difference_exp(const std::vector<double>& z) {
  if (z.empty()) fail(ErrorKind::ValidationError, "divided difference needs at least one node");
  const std::size_t n = z.size();
  std::vector<double> t(n * n);
  detail::dd_table(z.data(), n, t.data());
  return t[n - 1];
}

struct SimplexExpResult {
  double integral = 0;
  std::vector<double> moments;  // integral of lambda_j exp(l), one per vertex
};

/// Integral and barycentric moments of exp(l) over a simplex of volume `volume`,
/// where l is affine with vertex values `values`.
inline SimplexExpResult exp_simplex_from_volume(double volume, const std::vector<double>& values) {
  const std::size_t k1 = values.size();
  if (!(volume > 0.0)) fail(ErrorKind::DegenerateSimplex, "simplex has zero volume");
  // Nodes v_0..v_k, v_0..v_k: the run starting at j of length k+2 is all nodes plus v_j again.
  const std::size_t n = 2 * k1;
  thread_local std::vector<double> z, t;
  z.assign(values.begin(), values.end());
  z.insert(z.end(), values.begin(), values.end());
  t.resize(n * n);
  detail::dd_table(z.data(), n, t.data());
  const double scale = detail::factorial_d(k1 - 1) * volume;
  SimplexExpResult r;
  r.integral = scale * t[k1 - 1];
  r.moments.resize(k1);
  for (std::size_t j = 0; j < k1; ++j) r.moments[j] = scale * t[j * n + j + k1];
  return r;
}

/// Integral only; cheaper than exp_simplex_from_volume.
inline double exp_integral_from_volume(double volume, const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (!(volume > 0.0)) fail(ErrorKind::DegenerateSimplex, "simplex has zero volume");
  thread_local std::vector<double> t;
  t.resize(n * n);
  detail::dd_table(values.data(), n, t.data());
  return detail::factorial_d(n - 1) * volume * t[n - 1];
}

inline double exp_integral_simplex(const std::vector<std::vector<double>>& vertices,
                                   const std::vector<double>& values) {
  if (vertices.size() != values.size() || vertices.empty() || vertices[0].size() + 1 != vertices.size())
    fail(ErrorKind::DimensionMismatch, "need k+1 vertices in R^k and one value per vertex");
  double vol = detail::simplex_volume_d(vertices);
  if (!(vol > 0.0)) fail(ErrorKind::DegenerateSimplex, "simplex has zero volume");
  return exp_integral_from_volume(vol, values);
}

inline double exp_moment_simplex(const std::vector<std::vector<double>>& vertices, const std::vector<double>& values,
                                 std::size_t j) {
  if (vertices.size() != values.size() || vertices.empty() || vertices[0].size() + 1 != vertices.size())
    fail(ErrorKind::DimensionMismatch, "need k+1 vertices in R^k and one value per vertex");
  if (j >= values.size()) fail(ErrorKind::ValidationError, "vertex index out of range");
  return exp_simplex_from_volume(detail::simplex_volume_d(vertices), values).moments[j];
}

}  // namespace lcgm
