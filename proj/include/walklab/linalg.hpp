#pragma once

// Small dense linear algebra for the finite-chain verifiers: row-major
// matrices, LU with partial pivoting, iterative refinement with long-double
// residuals, and strongly connected components. Chains are capped at 2000
// states, so dense O(n^3) is plenty.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "walklab/errors.hpp"

namespace walklab {

using Vec = std::vector<double>;

class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double init = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, init) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(a_.data() + i * cols_, cols_);
  }
  std::span<double> row(std::size_t i) {
    return std::span<double>(a_.data() + i * cols_, cols_);
  }

  Mat transposed() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

inline Mat mat_mul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw NumericalError("mat_mul: shape mismatch");
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = a(i, k);
      if (v == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += v * b(k, j);
    }
  return c;
}

// row vector times matrix
inline Vec vec_mat(std::span<const double> v, const Mat& a) {
  if (v.size() != a.rows()) throw NumericalError("vec_mat: shape mismatch");
  Vec out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double x = v[i];
    if (x == 0.0) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += x * a(i, j);
  }
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

struct LuDecomposition {
  Mat lu;
  std::vector<int> piv;
  bool singular = false;

  Vec solve(std::span<const double> b) const {
    const std::size_t n = lu.rows();
    Vec x(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t p = static_cast<std::size_t>(piv[i]);
      if (p != i) std::swap(x[i], x[p]);
    }
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
      x[i] /= lu(i, i);
    }
    return x;
  }
};

inline LuDecomposition lu_factor(const Mat& a) {
  if (a.rows() != a.cols()) throw NumericalError("lu_factor: square matrices only");
  const std::size_t n = a.rows();
  LuDecomposition d{a, std::vector<int>(n), false};
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(d.lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(d.lu(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    d.piv[k] = static_cast<int>(p);
    if (best < 1e-300) {
      d.singular = true;
      d.lu(k, k) = d.lu(k, k) >= 0 ? 1e-300 : -1e-300;
      continue;
    }
    if (p != k)
      for (std::size_t j = 0; j < n; ++j) std::swap(d.lu(k, j), d.lu(p, j));
    const double inv = 1.0 / d.lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = d.lu(i, k) * inv;
      d.lu(i, k) = f;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) d.lu(i, j) -= f * d.lu(k, j);
    }
  }
  return d;
}

// Solve A x = b, then sharpen x with refinement passes whose residuals are
// accumulated in long double.
inline Vec solve_refined(const Mat& a, const LuDecomposition& lu, std::span<const double> b,
                         int refinements = 2) {
  const std::size_t n = a.rows();
  Vec x = lu.solve(b);
  Vec r(n);
  for (int pass = 0; pass < refinements; ++pass) {
    for (std::size_t i = 0; i < n; ++i) {
      long double acc = b[i];
      for (std::size_t j = 0; j < n; ++j)
        acc -= static_cast<long double>(a(i, j)) * static_cast<long double>(x[j]);
      r[i] = static_cast<double>(acc);
    }
    const Vec dx = lu.solve(r);
    for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
  }
  return x;
}

// Solve A X = B column by column (with refinement).
inline Mat solve_matrix(const Mat& a, const Mat& b, int refinements = 2) {
  const LuDecomposition lu = lu_factor(a);
  if (lu.singular) throw StructuralError("singular linear system");
  Mat x(a.rows(), b.cols());
  Vec col(b.rows());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
    const Vec sol = solve_refined(a, lu, col, refinements);
    for (std::size_t i = 0; i < a.rows(); ++i) x(i, j) = sol[i];
  }
  return x;
}

// Tarjan's strongly connected components (iterative). Returns the component
// index of every node; indices are otherwise arbitrary.
inline std::vector<int> strongly_connected_components(const std::vector<std::vector<int>>& adj,
                                                      int* component_count = nullptr) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<int> stack;
  int next_index = 0, n_comp = 0;

  struct Frame {
    int v;
    std::size_t child;
  };
  std::vector<Frame> call;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.child < adj[f.v].size()) {
        const int w = adj[f.v][f.child++];
        if (index[w] == -1) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          for (;;) {
            const int w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp[w] = n_comp;
            if (w == f.v) break;
          }
          ++n_comp;
        }
        const int v = f.v;
        call.pop_back();
        if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      }
    }
  }
  if (component_count) *component_count = n_comp;
  return comp;
}

}  // namespace walklab
