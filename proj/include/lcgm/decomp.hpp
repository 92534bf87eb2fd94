#pragma once

// Clique-wise convex decomposition of quadratic forms (x - mu)^T K (x - mu) on
// chordal graphs. Works over exact rationals or doubles.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include "lcgm/detail/linalg.hpp"
#include "lcgm/error.hpp"
#include "lcgm/graph.hpp"
#include "lcgm/rational.hpp"

namespace lcgm {

template <class T>
using Mat = std::vector<std::vector<T>>;

/// Float-mode tolerances.
inline constexpr double kPinvThreshold = 1e-10;
inline constexpr double kPsdTolerance = 1e-8;

template <class T>
struct QuadraticForm {
  Mat<T> K;
  std::vector<T> mu;  // empty means zero

  std::size_t dim() const { return K.size(); }
};

template <class T>
struct CliqueDecomposition {
  CliqueList cliques;            // RIP order
  std::vector<Mat<T>> pieces;    // |C_i| x |C_i|; term i is (x-mu)_C^T pieces[i] (x-mu)_C
  std::vector<VertexSet> separators;  // C_i ∩ (C_{i+1} ∪ ... ∪ C_t)
  std::vector<Mat<T>> thetas;    // |separator_i| x |separator_i|, i < t-1
  std::vector<std::vector<std::size_t>> absorbed;  // A_i: earlier thetas added into clique i
  std::vector<T> mu;
};

namespace detail {

template <class T>
Mat<T> zeros(std::size_t r, std::size_t c) {
  return Mat<T>(r, std::vector<T>(c, T(0)));
}

template <class T>
Mat<T> submatrix(const Mat<T>& m, const VertexSet& rows, const VertexSet& cols) {
  Mat<T> out = zeros<T>(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out[i][j] = m[rows[i]][cols[j]];
  return out;
}

template <class T>
void add_embedded(Mat<T>& big, const VertexSet& at, const Mat<T>& small, int sign = 1) {
  for (std::size_t i = 0; i < at.size(); ++i)
    for (std::size_t j = 0; j < at.size(); ++j) {
      if (sign > 0) big[at[i]][at[j]] += small[i][j];
      else big[at[i]][at[j]] -= small[i][j];
    }
}

template <class T>
Mat<T> multiply(const Mat<T>& a, const Mat<T>& b) {
  const std::size_t n = a.size(), m = b.empty() ? 0 : b[0].size(), k = b.size();
  Mat<T> out = zeros<T>(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      if (a[i][l] == T(0)) continue;
      for (std::size_t j = 0; j < m; ++j) out[i][j] += a[i][l] * b[l][j];
    }
  return out;
}

template <class T>
Mat<T> transpose(const Mat<T>& a) {
  if (a.empty()) return {};
  Mat<T> out = zeros<T>(a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) out[j][i] = a[i][j];
  return out;
}

inline Eigen::MatrixXd to_eigen(const Mat<double>& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  const auto c = n ? static_cast<Eigen::Index>(m[0].size()) : 0;
  Eigen::MatrixXd e(n, c);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < c; ++j) e(i, j) = m[i][j];
  return e;
}

inline Mat<double> from_eigen(const Eigen::MatrixXd& e) {
  Mat<double> m = zeros<double>(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m[i][j] = e(i, j);
  return m;
}

/// Exact Moore-Penrose pseudoinverse through a full-rank factorization m = F G:
/// m^+ = G^T (G G^T)^{-1} (F^T F)^{-1} F^T.
inline Mat<Rational> pinv_exact(const Mat<Rational>& m) {
  const std::size_t n = m.size();
  if (n == 0) return {};
  const std::size_t c = m[0].size();
  RMatrix r = m;
  auto piv = rref(r, c);
  const std::size_t k = piv.size();
  if (k == 0) return zeros<Rational>(c, n);
  Mat<Rational> G(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k));
  Mat<Rational> F = zeros<Rational>(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) F[i][j] = m[i][piv[j]];
  auto inverse = [](Mat<Rational> a) {
    const std::size_t s = a.size();
    Mat<Rational> inv = zeros<Rational>(s, s);
    for (std::size_t col = 0; col < s; ++col) {
      std::vector<Rational> e(s, Rational(0)), x;
      e[col] = 1;
      if (!solve(a, e, x)) fail(ErrorKind::NotPSD, "singular factor in pseudoinverse");
      for (std::size_t i = 0; i < s; ++i) inv[i][col] = x[i];
    }
    return inv;
  };
  auto Gt = transpose(G), Ft = transpose(F);
  return multiply(multiply(Gt, inverse(multiply(G, Gt))), multiply(inverse(multiply(Ft, F)), Ft));
}

template <class T>
Mat<T> pinv(const Mat<T>& m) {
  if constexpr (std::is_same_v<T, Rational>) {
    return pinv_exact(m);
  } else {
    if (m.empty()) return {};
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = s(i) > kPinvThreshold ? 1.0 / s(i) : 0.0;
    return from_eigen(svd.matrixV() * s.asDiagonal() * svd.matrixU().transpose());
  }
}

}  // namespace detail

/// Exact LDL^T certificate: true iff the symmetric rational matrix is PSD.
inline bool is_psd_exact(Mat<Rational> a) {
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Rational p = a[k][k];
    if (p < 0) return false;
    if (p == 0) {
      for (std::size_t j = k + 1; j < n; ++j)
        if (a[k][j] != 0) return false;
      continue;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      if (a[i][k] == 0) continue;
      const Rational f = a[i][k] / p;
      for (std::size_t j = k + 1; j < n; ++j) a[i][j] -= f * a[k][j];
    }
  }
  return true;
}

inline double min_eigenvalue(const Mat<double>& a) {
  if (a.empty()) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::to_eigen(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <class T>
bool is_psd(const Mat<T>& a) {
  if constexpr (std::is_same_v<T, Rational>) return is_psd_exact(a);
  else return min_eigenvalue(a) >= -kPsdTolerance;
}

template <class T>
bool is_symmetric(const Mat<T>& a) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != a.size()) return false;
    for (std::size_t j = 0; j < i; ++j)
      if (a[i][j] != a[j][i]) return false;
  }
  return true;
}

/// Entries K_lm with l != m that are nonzero on a non-edge (0-based pairs).
template <class T>
std::vector<std::pair<int, int>> graph_violations(const Mat<T>& K, const Graph& g) {
  std::vector<std::pair<int, int>> out;
  for (int l = 0; l < g.d(); ++l)
    for (int m = l + 1; m < g.d(); ++m)
      if (!g.adjacent(l, m) && (K[l][m] != T(0) || K[m][l] != T(0))) out.emplace_back(l, m);
  return out;
}

template <class T>
void validate_form(const QuadraticForm<T>& q, const Graph& g) {
  if (q.K.size() != static_cast<std::size_t>(g.d())) fail(ErrorKind::DimensionMismatch, "matrix size differs from graph");
  if (!is_symmetric(q.K)) fail(ErrorKind::ValidationError, "matrix is not symmetric");
  if (!q.mu.empty() && q.mu.size() != q.K.size()) fail(ErrorKind::DimensionMismatch, "center has the wrong length");
  auto bad = graph_violations(q.K, g);
  if (!bad.empty()) {
    std::string msg = "nonzero entries on non-edges:";
    for (auto [l, m] : bad) msg += " (" + std::to_string(l + 1) + "," + std::to_string(m + 1) + ")";
    fail(ErrorKind::GraphViolation, msg);
  }
}

/// K^(i): each entry goes to the last clique (in `order`) containing both endpoints.
template <class T>
std::vector<Mat<T>> markov_quadratic_split(const QuadraticForm<T>& q, const Graph& g, const CliqueList& order) {
  validate_form(q, g);
  std::vector<Mat<T>> out;
  for (const auto& c : order) out.push_back(detail::zeros<T>(c.size(), c.size()));
  const int d = g.d();
  for (int l = 0; l < d; ++l)
    for (int m = 0; m < d; ++m) {
      if (q.K[l][m] == T(0)) continue;
      for (std::size_t i = order.size(); i-- > 0;) {
        const auto& c = order[i];
        auto pl = std::find(c.begin(), c.end(), l), pm = std::find(c.begin(), c.end(), m);
        if (pl != c.end() && pm != c.end()) {
          out[i][static_cast<std::size_t>(pl - c.begin())][static_cast<std::size_t>(pm - c.begin())] = q.K[l][m];
          break;
        }
      }
    }
  return out;
}

template <class T>
std::vector<Mat<T>> markov_quadratic_split(const QuadraticForm<T>& q, const Graph& g) {
  return markov_quadratic_split(q, g, rip_ordering(g));
}

/// S = -M_BB + N + M_BC M_CC^+ M_BC^T for a PSD M with zero (A, C) block; both
/// [[M_AA, M_AB], [M_AB^T, N - S]] and [[M_BB - N + S, M_BC], [M_BC^T, M_CC]] are PSD.
template <class T>
Mat<T> separation_matrix(const Mat<T>& M, const Mat<T>& N, const VertexSet& A, const VertexSet& B,
                         const VertexSet& C) {
  for (int a : A)
    for (int c : C)
      if (M[a][c] != T(0) || M[c][a] != T(0))
        fail(ErrorKind::BlockStructureViolation,
             "entry (" + std::to_string(a + 1) + "," + std::to_string(c + 1) + ") must vanish");
  if (!is_psd(M)) fail(ErrorKind::NotPSD, "matrix is not positive semidefinite");
  Mat<T> S = detail::submatrix(M, B, B);
  for (std::size_t i = 0; i < B.size(); ++i)
    for (std::size_t j = 0; j < B.size(); ++j) S[i][j] = N[i][j] - S[i][j];
  if (!C.empty()) {
    auto MBC = detail::submatrix(M, B, C);
    auto corr = detail::multiply(detail::multiply(MBC, detail::pinv(detail::submatrix(M, C, C))), detail::transpose(MBC));
    for (std::size_t i = 0; i < B.size(); ++i)
      for (std::size_t j = 0; j < B.size(); ++j) S[i][j] += corr[i][j];
  }
  if constexpr (!std::is_same_v<T, Rational>) {
    // Symmetrize away rounding noise.
    for (std::size_t i = 0; i < B.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) S[i][j] = S[j][i] = 0.5 * (S[i][j] + S[j][i]);
  }
  return S;
}

template <class T>
CliqueDecomposition<T> gaussian_convex_decomposition(const QuadraticForm<T>& q, const Graph& g) {
  if (!is_chordal(g).chordal) fail(ErrorKind::NotChordal, "graph is not chordal");
  validate_form(q, g);
  if (!is_psd(q.K)) fail(ErrorKind::NotPSD, "matrix is not positive semidefinite");
  const std::size_t d = q.K.size();

  CliqueDecomposition<T> dec;
  dec.cliques = rip_ordering(g);
  dec.mu = q.mu.empty() ? std::vector<T>(d, T(0)) : q.mu;
  const std::size_t t = dec.cliques.size();
  auto split = markov_quadratic_split(q, g, dec.cliques);

  // Separators, later unions and the absorbing clique of each separator.
  std::vector<VertexSet> later(t);
  for (std::size_t i = t; i-- > 0;) later[i] = i + 1 < t ? set_union(later[i + 1], dec.cliques[i + 1]) : VertexSet{};
  dec.separators.resize(t);
  dec.absorbed.assign(t, {});
  for (std::size_t i = 0; i + 1 < t; ++i) {
    dec.separators[i] = set_intersection(dec.cliques[i], later[i]);
    std::size_t k = i + 1;
    while (!is_subset(dec.separators[i], dec.cliques[k])) ++k;
    dec.absorbed[k].push_back(i);
  }

  // Full-size working copies of the pieces.
  std::vector<Mat<T>> full(t, detail::zeros<T>(d, d));
  for (std::size_t i = 0; i < t; ++i) detail::add_embedded(full[i], dec.cliques[i], split[i]);
  dec.thetas.assign(t > 0 ? t - 1 : 0, {});
  VertexSet all;
  for (std::size_t v = 0; v < d; ++v) all.push_back(static_cast<int>(v));

  for (std::size_t i = 0; i + 1 < t; ++i) {
    // Absorb earlier separators into clique i.
    for (auto j : dec.absorbed[i]) detail::add_embedded(full[i], dec.separators[j], dec.thetas[j]);
    // Pieces i..t, with thetas of cliques < i already absorbed where they belong.
    Mat<T> M = detail::zeros<T>(d, d);
    for (std::size_t j = i; j < t; ++j) {
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) M[r][c] += full[j][r][c];
      if (j > i)
        for (auto k : dec.absorbed[j])
          if (k < i) detail::add_embedded(M, dec.separators[k], dec.thetas[k]);
    }
    const VertexSet& B = dec.separators[i];
    VertexSet A, C;
    for (int v : all) {
      if (!std::binary_search(later[i].begin(), later[i].end(), v)) A.push_back(v);
      else if (!std::binary_search(dec.cliques[i].begin(), dec.cliques[i].end(), v)) C.push_back(v);
    }
    Mat<T> N = detail::submatrix(full[i], B, B);
    dec.thetas[i] = separation_matrix(M, N, A, B, C);
    detail::add_embedded(full[i], B, dec.thetas[i], -1);
  }
  if (t > 0)
    for (auto j : dec.absorbed[t - 1]) detail::add_embedded(full[t - 1], dec.separators[j], dec.thetas[j]);

  for (std::size_t i = 0; i < t; ++i) dec.pieces.push_back(detail::submatrix(full[i], dec.cliques[i], dec.cliques[i]));
  return dec;
}

struct VerifyReport {
  bool sum_identity = false;
  std::vector<bool> psd;  // one per piece
  bool clique_support = false;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

/// Checks an arbitrary decomposition: pieces on maximal cliques, each PSD, summing to K.
template <class T>
VerifyReport verify_decomposition(const QuadraticForm<T>& q, const CliqueDecomposition<T>& dec, const Graph& g) {
  VerifyReport r;
  const std::size_t d = q.K.size();
  auto maximal = maximal_cliques(g);
  r.clique_support = dec.cliques.size() == dec.pieces.size();
  for (std::size_t i = 0; i < dec.cliques.size() && r.clique_support; ++i) {
    bool is_max = std::find(maximal.begin(), maximal.end(), dec.cliques[i]) != maximal.end();
    bool shaped = dec.pieces[i].size() == dec.cliques[i].size();
    for (const auto& row : dec.pieces[i]) shaped = shaped && row.size() == dec.cliques[i].size();
    if (!is_max || !shaped) {
      r.clique_support = false;
      r.failures.push_back("piece " + std::to_string(i + 1) + " is not a matrix on a maximal clique");
    }
  }
  if (!r.clique_support) return r;

  if (!dec.mu.empty() && !q.mu.empty() && dec.mu != q.mu) r.failures.push_back("centers differ");
  Mat<T> sum = detail::zeros<T>(d, d);
  for (std::size_t i = 0; i < dec.pieces.size(); ++i) detail::add_embedded(sum, dec.cliques[i], dec.pieces[i]);
  r.sum_identity = true;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      // Compare symmetrized coefficients: x_a x_b appears as K_ab + K_ba.
      T lhs = sum[a][b] + sum[b][a], rhs = q.K[a][b] + q.K[b][a];
      bool eq;
      if constexpr (std::is_same_v<T, Rational>) eq = lhs == rhs;
      else eq = std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(rhs));
      if (!eq) r.sum_identity = false;
    }
  if (!r.sum_identity) r.failures.push_back("pieces do not sum to the quadratic form");
  for (std::size_t i = 0; i < dec.pieces.size(); ++i) {
    Mat<T> sym = dec.pieces[i];
    for (std::size_t a = 0; a < sym.size(); ++a)
      for (std::size_t b = 0; b < a; ++b) sym[a][b] = sym[b][a] = (sym[a][b] + sym[b][a]) / T(2);
    r.psd.push_back(is_psd(sym));
    if (!r.psd.back()) r.failures.push_back("piece " + std::to_string(i + 1) + " is not positive semidefinite");
  }
  return r;
}

}  // namespace lcgm
