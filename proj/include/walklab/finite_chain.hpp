#pragma once

// Exact verification engine for finite-state chains. Everything is computed
// by first-passage linear algebra on the block decomposition of the kernel
//
//     P = [ R  U ]   (R on A x A,   U on A x A^c,
//         [ V  Q ]    V on A^c x A, Q on A^c x A^c)
//
// and checked against the closed identities: invariance of the stationary
// vector under the induced / entrance / exit kernels, the two equivalent
// formulas for the entrance measure, mass balance between entrance and exit
// measures, exit/entrance duality under time reversal, the reduction of the
// (exit, entrance) pair to an induced chain on A^c x A, and the occupation
// ("Kac") lifts that rebuild the stationary measure from an induced or
// entrance invariant vector.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "walklab/errors.hpp"
#include "walklab/increment_laws.hpp"
#include "walklab/linalg.hpp"
#include "walklab/rng.hpp"

namespace walklab {

class FiniteChain {
 public:
  FiniteChain(Mat P, std::vector<std::uint8_t> A_mask, std::vector<std::string> labels = {})
      : P_(std::move(P)), A_mask_(std::move(A_mask)), labels_(std::move(labels)) {
    const std::size_t n = P_.rows();
    if (n == 0 || P_.cols() != n) throw ConfigError("transition matrix must be square");
    if (n > 2000) throw ConfigError("chains are capped at 2000 states");
    if (A_mask_.size() != n) throw ConfigError("A mask size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (P_(i, j) < 0.0) throw ConfigError("negative transition probability");
        row_sum += P_(i, j);
      }
      if (std::abs(row_sum - 1.0) > 1e-12)
        throw ConfigError("row " + std::to_string(i) + " sums to " + std::to_string(row_sum));
    }
    if (labels_.empty())
      for (std::size_t i = 0; i < n; ++i) labels_.push_back(std::to_string(i));
  }

  std::size_t size() const { return P_.rows(); }
  const Mat& P() const { return P_; }
  const std::vector<std::uint8_t>& A_mask() const { return A_mask_; }
  const std::vector<std::string>& labels() const { return labels_; }

  std::vector<int> A_indices() const {
    std::vector<int> v;
    for (std::size_t i = 0; i < size(); ++i)
      if (A_mask_[i]) v.push_back(static_cast<int>(i));
    return v;
  }
  std::vector<int> Ac_indices() const {
    std::vector<int> v;
    for (std::size_t i = 0; i < size(); ++i)
      if (!A_mask_[i]) v.push_back(static_cast<int>(i));
    return v;
  }

  std::vector<int> components() const {
    std::vector<std::vector<int>> adj(size());
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j)
        if (P_(i, j) > 0.0) adj[i].push_back(static_cast<int>(j));
    return strongly_connected_components(adj);
  }

  bool irreducible() const {
    const std::vector<int> comp = components();
    for (int c : comp)
      if (c != comp[0]) return false;
    return true;
  }

 private:
  Mat P_;
  std::vector<std::uint8_t> A_mask_;
  std::vector<std::string> labels_;
};

inline Mat normalize_rows(Mat m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j);
    if (s > 0.0)
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) /= s;
  }
  return m;
}

// --- stationary vector -------------------------------------------------------

// Unique stationary probability vector of an irreducible chain, by LU with
// partial pivoting plus iterative refinement on (P^T - I) with one row
// replaced by the normalization.
inline Vec stationary(const FiniteChain& chain) {
  if (!chain.irreducible()) {
    const std::vector<int> comp = chain.components();
    std::map<int, std::vector<std::string>> groups;
    for (std::size_t i = 0; i < comp.size(); ++i)
      groups[comp[i]].push_back(chain.labels()[i]);
    std::string msg = "chain is reducible; strongly connected components:";
    for (const auto& [id, names] : groups) {
      msg += " {";
      for (std::size_t i = 0; i < names.size(); ++i) msg += (i ? "," : "") + names[i];
      msg += "}";
    }
    throw StructuralError(msg);
  }
  const std::size_t n = chain.size();
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = chain.P()(j, i) - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) m(n - 1, j) = 1.0;
  Vec b(n, 0.0);
  b[n - 1] = 1.0;
  const LuDecomposition lu = lu_factor(m);
  if (lu.singular) throw StructuralError("stationary solve is singular");
  Vec mu = solve_refined(m, lu, b, 3);
  double sum = 0.0;
  for (double& v : mu) {
    if (v < 0.0 && v > -1e-13) v = 0.0;
    if (v < 0.0) throw NumericalError("stationary vector has a negative entry");
    sum += v;
  }
  for (double& v : mu) v /= sum;
  if (max_abs_diff(vec_mat(mu, chain.P()), mu) > 1e-12)
    throw NumericalError("stationary residual exceeds 1e-12");
  return mu;
}

// --- dual / induced / entrance / exit kernels ---------------------------------

// Time reversal with respect to mu: dual(x, y) = mu(y) P(y, x) / mu(x).
inline Mat dual_kernel(const Mat& P, const Vec& mu) {
  const std::size_t n = P.rows();
  Mat d(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    if (!(mu[x] > 0.0)) throw StructuralError("dual kernel needs mu > 0 everywhere");
    for (std::size_t y = 0; y < n; ++y) d(x, y) = mu[y] * P(y, x) / mu[x];
  }
  return d;
}

namespace detail {

struct Blocks {
  std::vector<int> a, ac;  // state indices of A and A^c
  Mat R, U, V, Q;
};

inline Blocks split_blocks(const Mat& P, const std::vector<std::uint8_t>& A_mask) {
  Blocks b;
  for (std::size_t i = 0; i < P.rows(); ++i)
    (A_mask[i] ? b.a : b.ac).push_back(static_cast<int>(i));
  const std::size_t ka = b.a.size(), kc = b.ac.size();
  b.R = Mat(ka, ka);
  b.U = Mat(ka, kc);
  b.V = Mat(kc, ka);
  b.Q = Mat(kc, kc);
  for (std::size_t i = 0; i < ka; ++i)
    for (std::size_t j = 0; j < ka; ++j) b.R(i, j) = P(b.a[i], b.a[j]);
  for (std::size_t i = 0; i < ka; ++i)
    for (std::size_t j = 0; j < kc; ++j) b.U(i, j) = P(b.a[i], b.ac[j]);
  for (std::size_t i = 0; i < kc; ++i)
    for (std::size_t j = 0; j < ka; ++j) b.V(i, j) = P(b.ac[i], b.a[j]);
  for (std::size_t i = 0; i < kc; ++i)
    for (std::size_t j = 0; j < kc; ++j) b.Q(i, j) = P(b.ac[i], b.ac[j]);
  return b;
}

inline Mat eye_minus(const Mat& m) {
  Mat r = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = (i == j ? 1.0 : 0.0) - m(i, j);
  return r;
}

// X = B * (I - Q)^{-1}, computed as the solution of X (I - Q) = B.
inline Mat right_solve_eye_minus(const Mat& B, const Mat& Q) {
  const Mat t = solve_matrix(eye_minus(Q).transposed(), B.transposed());
  return t.transposed();
}

}  // namespace detail

// First-return kernel on A:  P_A = R + U (I - Q)^{-1} V.
inline Mat induced_kernel(const FiniteChain& chain) {
  const auto b = detail::split_blocks(chain.P(), chain.A_mask());
  if (b.a.empty()) throw StructuralError("induced kernel needs a nonempty A");
  if (b.ac.empty()) return b.R;  // A = all states: P_A = P
  Mat W;
  try {
    W = solve_matrix(detail::eye_minus(b.Q), b.V);
  } catch (const StructuralError&) {
    throw StructuralError("A^c is absorbing: (I - Q) is singular");
  }
  Mat out = mat_mul(b.U, W);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += b.R(i, j);
  return out;
}

// Entrance kernel on A:  E_A = (I - R)^{-1} U (I - Q)^{-1} V.
inline Mat entrance_kernel(const FiniteChain& chain) {
  const auto b = detail::split_blocks(chain.P(), chain.A_mask());
  if (b.a.empty() || b.ac.empty())
    throw StructuralError("entrance kernel needs nonempty A and A^c");
  Mat W;
  try {
    W = solve_matrix(detail::eye_minus(b.Q), b.V);
  } catch (const StructuralError&) {
    throw StructuralError("A^c is absorbing: (I - Q) is singular");
  }
  const Mat UW = mat_mul(b.U, W);
  try {
    return solve_matrix(detail::eye_minus(b.R), UW);
  } catch (const StructuralError&) {
    throw StructuralError("A is absorbing: (I - R) is singular");
  }
}

// Exit kernel on A^c_ex: condition one step into A, then propagate to the
// last A^c position before the next entrance:
//   X(x, w) = sum_y [P(x,y)/P_x(Y_1 in A)] [(I-R)^{-1} U (I-Q)^{-1}]_{y,w} P_w(Y_1 in A).
inline Mat exit_kernel(const FiniteChain& chain) {
  const auto b = detail::split_blocks(chain.P(), chain.A_mask());
  if (b.a.empty() || b.ac.empty()) throw StructuralError("exit kernel needs nonempty A and A^c");
  const std::size_t kc = b.ac.size();
  Vec p_into_A(kc, 0.0);  // P_x(Y_1 in A) for x in A^c
  for (std::size_t i = 0; i < kc; ++i)
    for (std::size_t j = 0; j < b.a.size(); ++j) p_into_A[i] += b.V(i, j);
  // G = (I-R)^{-1} U (I-Q)^{-1}  (A x A^c)
  const Mat UQinv = detail::right_solve_eye_minus(b.U, b.Q);
  const Mat G = solve_matrix(detail::eye_minus(b.R), UQinv);
  Mat out(kc, kc, 0.0);
  for (std::size_t x = 0; x < kc; ++x) {
    if (!(p_into_A[x] > 0.0)) continue;  // x outside A^c_ex keeps a zero row here
    for (std::size_t y = 0; y < b.a.size(); ++y) {
      const double t = b.V(x, y) / p_into_A[x];
      if (t == 0.0) continue;
      for (std::size_t w = 0; w < kc; ++w) out(x, w) += t * G(y, w) * p_into_A[w];
    }
  }
  return out;
}

// --- entrance / exit measures -------------------------------------------------

struct EntranceExitMeasures {
  Vec entr;          // on A (zero off A); mu_A^entr(x) = P_x(dual Y_1 in A^c) mu(x)
  Vec exit;          // on A^c; mu_{A^c}^exit(x) = P_x(Y_1 in A) mu(x)
  double mass = 0.0;            // common total mass = P_{mu|A^c}(Y_1 in A)
  double formula_gap = 0.0;     // two formulas for the entrance measure
  std::vector<int> A_en, Ac_ex; // supports (threshold 1e-14)
};

inline EntranceExitMeasures entrance_exit_measures(const FiniteChain& chain, const Vec& mu) {
  const Mat& P = chain.P();
  const std::size_t n = chain.size();
  const Mat dual = dual_kernel(P, mu);
  EntranceExitMeasures m;
  m.entr.assign(n, 0.0);
  m.exit.assign(n, 0.0);
  Vec entr_cross(n, 0.0);  // sum_{x in A^c} mu(x) P(x, y)
  for (std::size_t x = 0; x < n; ++x) {
    if (chain.A_mask()[x]) {
      double to_ac = 0.0;
      for (std::size_t y = 0; y < n; ++y)
        if (!chain.A_mask()[y]) to_ac += dual(x, y);
      m.entr[x] = to_ac * mu[x];
    } else {
      double to_a = 0.0;
      for (std::size_t y = 0; y < n; ++y)
        if (chain.A_mask()[y]) to_a += P(x, y);
      m.exit[x] = to_a * mu[x];
      for (std::size_t y = 0; y < n; ++y)
        if (chain.A_mask()[y]) entr_cross[y] += mu[x] * P(x, y);
    }
  }
  m.formula_gap = max_abs_diff(m.entr, entr_cross);
  double entr_mass = 0.0, exit_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    entr_mass += m.entr[i];
    exit_mass += m.exit[i];
    if (m.entr[i] > 1e-14) m.A_en.push_back(static_cast<int>(i));
    if (m.exit[i] > 1e-14) m.Ac_ex.push_back(static_cast<int>(i));
  }
  m.mass = exit_mass;
  m.formula_gap = std::max(m.formula_gap, std::abs(entr_mass - exit_mass));
  return m;
}

// --- occupation (Kac) lifts ----------------------------------------------------

// Lift of a measure nu on A through occupation before the first return to A:
//   lifted = nu on A,  nu U (I - Q)^{-1} on A^c.
inline Vec kac_lift(const FiniteChain& chain, const Vec& nu_on_A) {
  const auto b = detail::split_blocks(chain.P(), chain.A_mask());
  const std::size_t n = chain.size();
  if (nu_on_A.size() != n) throw ConfigError("kac_lift: nu must live on the full state vector");
  for (std::size_t i = 0; i < n; ++i)
    if (!chain.A_mask()[i] && nu_on_A[i] != 0.0)
      throw ConfigError("kac_lift: nu must be supported on A");
  Vec lifted = nu_on_A;
  if (b.ac.empty()) return lifted;
  Vec nu_a(b.a.size());
  for (std::size_t i = 0; i < b.a.size(); ++i) nu_a[i] = nu_on_A[b.a[i]];
  const Vec y = vec_mat(nu_a, b.U);
  // z (I - Q) = y  =>  (I - Q)^T z^T = y^T
  const Mat iq_t = detail::eye_minus(b.Q).transposed();
  const LuDecomposition lu = lu_factor(iq_t);
  if (lu.singular) throw StructuralError("kac_lift: (I - Q) is singular");
  const Vec z = solve_refined(iq_t, lu, y, 3);
  for (std::size_t i = 0; i < b.ac.size(); ++i) lifted[b.ac[i]] = z[i];
  return lifted;
}

// Lift of a measure nu on A through occupation up to the next entrance time:
//   lifted = nu (I - R)^{-1} on A,  nu (I - R)^{-1} U (I - Q)^{-1} on A^c.
inline Vec kac_lift_entrance_measure(const FiniteChain& chain, const Vec& nu_on_A) {
  const auto b = detail::split_blocks(chain.P(), chain.A_mask());
  const std::size_t n = chain.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!chain.A_mask()[i] && nu_on_A[i] != 0.0)
      throw ConfigError("kac_lift_entrance: nu must be supported on A");
  Vec nu_a(b.a.size());
  for (std::size_t i = 0; i < b.a.size(); ++i) nu_a[i] = nu_on_A[b.a[i]];

  const Mat ir_t = detail::eye_minus(b.R).transposed();
  const LuDecomposition lu_r = lu_factor(ir_t);
  if (lu_r.singular) throw StructuralError("kac_lift_entrance: (I - R) is singular");
  const Vec in_A = solve_refined(ir_t, lu_r, nu_a, 3);  // nu (I - R)^{-1}

  Vec lifted(n, 0.0);
  for (std::size_t i = 0; i < b.a.size(); ++i) lifted[b.a[i]] = in_A[i];
  if (!b.ac.empty()) {
    const Vec y = vec_mat(in_A, b.U);
    const Mat iq_t = detail::eye_minus(b.Q).transposed();
    const LuDecomposition lu_q = lu_factor(iq_t);
    if (lu_q.singular) throw StructuralError("kac_lift_entrance: (I - Q) is singular");
    const Vec z = solve_refined(iq_t, lu_q, y, 3);
    for (std::size_t i = 0; i < b.ac.size(); ++i) lifted[b.ac[i]] = z[i];
  }
  return lifted;
}

// Kac lift of mu_A^entr must rebuild mu exactly.
inline Vec kac_lift_entrance(const FiniteChain& chain, const Vec& mu) {
  const EntranceExitMeasures m = entrance_exit_measures(chain, mu);
  return kac_lift_entrance_measure(chain, m.entr);
}

// --- verification reports -------------------------------------------------------

struct VerifyReport {
  std::string name;
  bool pass = false;
  bool skipped = false;
  std::string reason;
  double max_residual = 0.0;
  std::map<std::string, double> residuals;

  void add(const std::string& key, double value) {
    residuals[key] = value;
    max_residual = std::max(max_residual, value);
  }
  void finish(double tolerance) { pass = skipped || max_residual <= tolerance; }
};

inline double row_stochastic_residual(const Mat& m, const std::vector<char>& active_row = {}) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (!active_row.empty() && !active_row[i]) continue;
    double s = 0.0, neg = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      s += m(i, j);
      neg = std::min(neg, m(i, j));
    }
    worst = std::max(worst, std::abs(s - 1.0));
    worst = std::max(worst, -neg);
  }
  return worst;
}

// Invariance of mu_A, mu_A^entr, mu_{A^c}^exit under the induced, entrance,
// and exit kernels, plus the two-formula agreement and the mass identity.
inline VerifyReport verify_theorem1(const FiniteChain& chain, const Vec& mu,
                                    double tolerance = 1e-10) {
  VerifyReport rep;
  rep.name = "theorem1_invariance";
  const auto A = chain.A_indices();
  const auto Ac = chain.Ac_indices();
  if (A.empty() || Ac.empty()) {
    rep.skipped = true;
    rep.reason = "A and A^c must both be nonempty";
    rep.finish(tolerance);
    return rep;
  }
  const EntranceExitMeasures m = entrance_exit_measures(chain, mu);
  if (!(m.mass > 0.0)) {
    rep.skipped = true;
    rep.reason = "P_{mu|A^c}(Y_1 in A) = 0";
    rep.finish(tolerance);
    return rep;
  }

  // induced: mu_A P_A = mu_A (restricted vectors)
  const Mat P_A = induced_kernel(chain);
  Vec mu_A(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) mu_A[i] = mu[A[i]];
  rep.add("induced_invariance", max_abs_diff(vec_mat(mu_A, P_A), mu_A));
  rep.add("induced_row_stochastic", row_stochastic_residual(P_A));

  // entrance: mu_A^entr E_A = mu_A^entr
  const Mat E_A = entrance_kernel(chain);
  Vec entr_A(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) entr_A[i] = m.entr[A[i]];
  rep.add("entrance_invariance", max_abs_diff(vec_mat(entr_A, E_A), entr_A));
  rep.add("entrance_row_stochastic", row_stochastic_residual(E_A));

  // exit: mu_{A^c}^exit X_{A^c} = mu_{A^c}^exit (rows exist on A^c_ex only)
  const Mat X = exit_kernel(chain);
  Vec exit_Ac(Ac.size());
  std::vector<char> ex_rows(Ac.size(), 0);
  for (std::size_t i = 0; i < Ac.size(); ++i) {
    exit_Ac[i] = m.exit[Ac[i]];
    ex_rows[i] = exit_Ac[i] > 1e-14;
  }
  rep.add("exit_invariance", max_abs_diff(vec_mat(exit_Ac, X), exit_Ac));
  rep.add("exit_row_stochastic", row_stochastic_residual(X, ex_rows));

  rep.add("entrance_formula_agreement", m.formula_gap);

  double exit_mass = 0.0;
  for (double v : m.exit) exit_mass += v;
  double cross_mass = 0.0;  // P_{mu|A^c}(Y_1 in A)
  for (int x : Ac)
    for (int y : A) cross_mass += mu[x] * chain.P()(x, y);
  rep.add("mass_identity", std::abs(exit_mass - cross_mass));

  rep.finish(tolerance);
  return rep;
}

// Exit chain of Y from A^c and entrance chain of the dual into A^c: the two
// sequences traverse the same event positions in opposite directions, so
// they share the invariant measure mu_{A^c}^exit and their one-step joint
// stationary laws coincide after swapping the pair:
//
//   mu^exit(x) X(x, w) = mu^exit(w) E_dual(w, x).
//
// (Literal kernel equality X = E_dual holds only when the exit chain happens
// to be reversible, e.g. exit spaces of at most two states.)
inline VerifyReport verify_duality(const FiniteChain& chain, const Vec& mu,
                                   double tolerance = 1e-10) {
  VerifyReport rep;
  rep.name = "duality_exit_vs_dual_entrance";
  const auto A = chain.A_indices();
  const auto Ac = chain.Ac_indices();
  if (A.empty() || Ac.empty()) {
    rep.skipped = true;
    rep.reason = "A and A^c must both be nonempty";
    rep.finish(tolerance);
    return rep;
  }
  const Mat X = exit_kernel(chain);

  // Entrance kernel of the dual chain into A^c: swap the roles of A and A^c.
  std::vector<std::uint8_t> mask_c(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) mask_c[i] = !chain.A_mask()[i];
  const FiniteChain dual_chain(dual_kernel(chain.P(), mu), mask_c, chain.labels());
  const Mat E_dual = entrance_kernel(dual_chain);

  const EntranceExitMeasures m = entrance_exit_measures(chain, mu);
  double worst = 0.0;
  for (std::size_t i = 0; i < Ac.size(); ++i) {
    const double wi = m.exit[Ac[i]];
    for (std::size_t j = 0; j < Ac.size(); ++j) {
      const double wj = m.exit[Ac[j]];
      worst = std::max(worst, std::abs(wi * X(i, j) - wj * E_dual(j, i)));
    }
  }
  rep.add("stationary_pair_reversal", worst);

  // Shared invariant measure: mu^exit is invariant for the dual's entrance
  // chain into A^c as well.
  Vec exit_Ac(Ac.size());
  for (std::size_t i = 0; i < Ac.size(); ++i) exit_Ac[i] = m.exit[Ac[i]];
  rep.add("shared_invariant_measure", max_abs_diff(vec_mat(exit_Ac, E_dual), exit_Ac));
  rep.finish(tolerance);
  return rep;
}

// The pair (exit, entrance) equals the chain (Y_n, Y_{n+1}) induced on
// A^c x A: the induced product chain's stationary law must be the normalized
// restriction of mu(x) P(x, y).
inline VerifyReport verify_product_reduction(const FiniteChain& chain, const Vec& mu,
                                             double tolerance = 1e-10,
                                             std::size_t state_cap = 10000) {
  VerifyReport rep;
  rep.name = "product_reduction";
  const auto A = chain.A_indices();
  const auto Ac = chain.Ac_indices();
  if (A.empty() || Ac.empty()) {
    rep.skipped = true;
    rep.reason = "A and A^c must both be nonempty";
    rep.finish(tolerance);
    return rep;
  }
  const Mat& P = chain.P();
  const std::size_t n = chain.size();
  // States of the pair chain: support pairs (x, y) with P(x, y) > 0.
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::vector<int>> pair_id(n, std::vector<int>(n, -1));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (P(x, y) > 0.0) {
        pair_id[x][y] = static_cast<int>(pairs.size());
        pairs.emplace_back(static_cast<int>(x), static_cast<int>(y));
      }
  if (pairs.size() > state_cap) {
    rep.skipped = true;
    rep.reason = "product state space exceeds the size cap";
    rep.finish(tolerance);
    return rep;
  }
  Mat PP(pairs.size(), pairs.size(), 0.0);
  std::vector<std::uint8_t> mask(pairs.size(), 0);
  for (std::size_t s = 0; s < pairs.size(); ++s) {
    const auto [x, y] = pairs[s];
    mask[s] = !chain.A_mask()[x] && chain.A_mask()[y];  // A^c x A
    for (std::size_t z = 0; z < n; ++z)
      if (pair_id[y][z] >= 0) PP(s, static_cast<std::size_t>(pair_id[y][z])) = P(y, z);
  }
  bool any = false;
  for (auto v : mask) any = any || v;
  if (!any) {
    rep.skipped = true;
    rep.reason = "no support pair lies in A^c x A";
    rep.finish(tolerance);
    return rep;
  }
  const FiniteChain product(PP, mask);
  const Mat induced = induced_kernel(product);

  // Stationary law of the induced pair chain, via its restriction.
  std::vector<int> sub;  // indices of A^c x A pairs
  for (std::size_t s = 0; s < pairs.size(); ++s)
    if (mask[s]) sub.push_back(static_cast<int>(s));
  Mat K(sub.size(), sub.size());
  for (std::size_t i = 0; i < sub.size(); ++i)
    for (std::size_t j = 0; j < sub.size(); ++j) K(i, j) = induced(i, j);
  // induced_kernel returns rows indexed by the A-subset in order, which is
  // exactly `sub` here.
  const FiniteChain reduced(K, std::vector<std::uint8_t>(sub.size(), 1));
  const Vec nu = stationary(reduced);

  // Target: normalized mu(x) P(x, y) over A^c x A.
  double mass = 0.0;
  for (int s : sub) mass += mu[pairs[s].first] * P(pairs[s].first, pairs[s].second);
  double worst = 0.0;
  for (std::size_t i = 0; i < sub.size(); ++i) {
    const auto [x, y] = pairs[sub[i]];
    worst = std::max(worst, std::abs(nu[i] - mu[x] * P(x, y) / mass));
  }
  rep.add("joint_invariant_law", worst);
  rep.finish(tolerance);
  return rep;
}

// Bijection between invariant measures: the unique invariant vector of the
// induced (resp. entrance) chain lifts back to a multiple of mu.
inline VerifyReport verify_bijection(const FiniteChain& chain, const Vec& mu,
                                     double tolerance = 1e-10) {
  VerifyReport rep;
  rep.name = "bijection_lifts";
  const auto A = chain.A_indices();
  const auto Ac = chain.Ac_indices();
  if (A.empty()) {
    rep.skipped = true;
    rep.reason = "A must be nonempty";
    rep.finish(tolerance);
    return rep;
  }

  {  // induced side
    const Mat P_A = induced_kernel(chain);
    const FiniteChain on_A(P_A, std::vector<std::uint8_t>(A.size(), 1));
    const Vec nu = stationary(on_A);
    Vec nu_full(chain.size(), 0.0);
    for (std::size_t i = 0; i < A.size(); ++i) nu_full[A[i]] = nu[i];
    Vec lifted = kac_lift(chain, nu_full);
    double sum = 0.0;
    for (double v : lifted) sum += v;
    for (double& v : lifted) v /= sum;
    rep.add("induced_lift_proportional", max_abs_diff(lifted, mu));
  }

  if (!Ac.empty()) {  // entrance side
    const EntranceExitMeasures m = entrance_exit_measures(chain, mu);
    if (m.A_en.empty()) {
      rep.reason = "entrance set is empty";
    } else {
      const Mat E_A = entrance_kernel(chain);
      // Restrict to A_en (the entrance chain lives there).
      std::vector<int> pos_in_A(chain.size(), -1);
      for (std::size_t i = 0; i < A.size(); ++i) pos_in_A[A[i]] = static_cast<int>(i);
      Mat K(m.A_en.size(), m.A_en.size());
      for (std::size_t i = 0; i < m.A_en.size(); ++i)
        for (std::size_t j = 0; j < m.A_en.size(); ++j)
          K(i, j) = E_A(pos_in_A[m.A_en[i]], pos_in_A[m.A_en[j]]);
      // Renormalize rows against mass escaping A_en (below threshold anyway).
      const FiniteChain on_en(normalize_rows(K), std::vector<std::uint8_t>(m.A_en.size(), 1));
      const Vec nu = stationary(on_en);
      Vec nu_full(chain.size(), 0.0);
      for (std::size_t i = 0; i < m.A_en.size(); ++i) nu_full[m.A_en[i]] = nu[i];
      Vec lifted = kac_lift_entrance_measure(chain, nu_full);
      double sum = 0.0;
      for (double v : lifted) sum += v;
      for (double& v : lifted) v /= sum;
      rep.add("entrance_lift_proportional", max_abs_diff(lifted, mu));
    }
  }
  rep.finish(tolerance);
  return rep;
}

// --- kac reports -----------------------------------------------------------------

inline VerifyReport verify_kac(const FiniteChain& chain, const Vec& mu,
                               double tolerance = 1e-11) {
  VerifyReport rep;
  rep.name = "kac_lifts";
  Vec mu_on_A(chain.size(), 0.0);
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (chain.A_mask()[i]) mu_on_A[i] = mu[i];
  rep.add("kac_lift_restriction", max_abs_diff(kac_lift(chain, mu_on_A), mu));
  if (!chain.Ac_indices().empty()) {
    const EntranceExitMeasures m = entrance_exit_measures(chain, mu);
    if (m.mass > 0.0)
      rep.add("kac_lift_entrance", max_abs_diff(kac_lift_entrance_measure(chain, m.entr), mu));
  }
  rep.finish(tolerance);
  return rep;
}

// --- constructions -------------------------------------------------------------------

// Random walk on the discrete torus (Z/mZ)^d with pmf increments; the finite
// surrogate for a recurrent lattice walk. mu is exactly uniform.
inline FiniteChain torus_walk(int d, int m, const IncrementLaw& law,
                              const std::vector<std::uint8_t>& A_mask) {
  if (d != 1 && d != 2) throw ConfigError("torus_walk supports d = 1 or 2");
  if (m < 3) throw ConfigError("torus_walk needs side m >= 3");
  std::vector<const IncrementLaw*> comps;
  if (d == 1) {
    if (law.family() != Family::lattice_pmf) throw ConfigError("torus_walk needs a lattice pmf");
    comps = {&law};
  } else {
    if (law.family() != Family::product_of_1d || law.dimension() != d)
      throw ConfigError("torus_walk in d = 2 needs a 2-d product lattice law");
    comps = {&law.component(0), &law.component(1)};
  }
  for (const IncrementLaw* c : comps) {
    if (c->family() != Family::lattice_pmf)
      throw ConfigError("torus_walk components must be lattice pmfs");
    if (c->max_index() >= m || -c->min_index() >= m)
      throw ConfigError("increment support reaches around the torus: wraparound is ambiguous");
  }
  const std::size_t n = d == 1 ? static_cast<std::size_t>(m)
                               : static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
  if (A_mask.size() != n) throw ConfigError("torus_walk: A mask size mismatch");
  Mat P(n, n, 0.0);
  const auto wrap = [m](std::int64_t v) {
    std::int64_t r = v % m;
    return static_cast<int>(r < 0 ? r + m : r);
  };
  std::vector<std::string> labels;
  if (d == 1) {
    for (int s = 0; s < m; ++s) {
      for (const LatticeAtom& a : comps[0]->atoms())
        P(s, wrap(s + a.index)) += a.weight.to_double();
      labels.push_back(std::to_string(s));
    }
  } else {
    for (int sx = 0; sx < m; ++sx)
      for (int sy = 0; sy < m; ++sy) {
        const std::size_t s = static_cast<std::size_t>(sx) * m + sy;
        for (const LatticeAtom& ax : comps[0]->atoms())
          for (const LatticeAtom& ay : comps[1]->atoms())
            P(s, static_cast<std::size_t>(wrap(sx + ax.index)) * m + wrap(sy + ay.index)) +=
                ax.weight.to_double() * ay.weight.to_double();
        labels.push_back("(" + std::to_string(sx) + "," + std::to_string(sy) + ")");
      }
  }
  return FiniteChain(std::move(P), A_mask, std::move(labels));
}

// The entrance-measure tail form P(X_1 in x - A^c) / m^d evaluated directly
// from the increment pmf on the torus; the exact target for torus checks.
inline Vec torus_entrance_tail_form(int d, int m, const IncrementLaw& law,
                                    const std::vector<std::uint8_t>& A_mask) {
  const std::size_t n = A_mask.size();
  Vec target(n, 0.0);
  const auto wrap = [m](std::int64_t v) {
    std::int64_t r = v % m;
    return static_cast<int>(r < 0 ? r + m : r);
  };
  const double inv_total = 1.0 / static_cast<double>(n);
  if (d == 1) {
    for (int x = 0; x < m; ++x) {
      if (!A_mask[x]) continue;
      double q = 0.0;
      for (const LatticeAtom& a : law.atoms())
        if (!A_mask[wrap(x - a.index)]) q += a.weight.to_double();
      target[x] = q * inv_total;
    }
  } else {
    for (int xx = 0; xx < m; ++xx)
      for (int xy = 0; xy < m; ++xy) {
        const std::size_t s = static_cast<std::size_t>(xx) * m + xy;
        if (!A_mask[s]) continue;
        double q = 0.0;
        for (const LatticeAtom& ax : law.component(0).atoms())
          for (const LatticeAtom& ay : law.component(1).atoms())
            if (!A_mask[static_cast<std::size_t>(wrap(xx - ax.index)) * m + wrap(xy - ay.index)])
              q += ax.weight.to_double() * ay.weight.to_double();
        target[s] = q * inv_total;
      }
  }
  return target;
}

// Dirichlet(1,...,1) rows blended with a deterministic cycle, which makes the
// chain irreducible by construction.
inline FiniteChain random_chain(RngState& rng, std::size_t n_states) {
  Mat P(n_states, n_states);
  for (std::size_t i = 0; i < n_states; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n_states; ++j) {
      P(i, j) = rng.exponential();
      sum += P(i, j);
    }
    for (std::size_t j = 0; j < n_states; ++j) P(i, j) = 0.95 * P(i, j) / sum;
    P(i, (i + 1) % n_states) += 0.05;
    // exact row normalization
    double s2 = 0.0;
    for (std::size_t j = 0; j < n_states; ++j) s2 += P(i, j);
    for (std::size_t j = 0; j < n_states; ++j) P(i, j) /= s2;
  }
  std::vector<std::uint8_t> mask(n_states, 0);
  std::size_t in_A = 0;
  for (std::size_t i = 0; i < n_states; ++i) {
    mask[i] = static_cast<std::uint8_t>(rng.next_u64() & 1u);
    in_A += mask[i];
  }
  if (in_A == 0) mask[rng.next_u64() % n_states] = 1;
  if (in_A == n_states) mask[rng.next_u64() % n_states] = 0;
  return FiniteChain(std::move(P), std::move(mask));
}

}  // namespace walklab
