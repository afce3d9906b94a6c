#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stlmc/divergence.hpp"
#include "stlmc/error.hpp"
#include "stlmc/rng.hpp"

namespace stlmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

inline Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

inline void check_stochastic(const Matrix& P) {
  require(P.rows() == P.cols() && P.rows() > 0, ErrorCode::invalid_argument, "transition matrix must be square");
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      require(std::isfinite(P(i, j)) && P(i, j) >= 0.0, ErrorCode::invalid_argument,
              "transition probabilities must be finite and nonnegative");
    require(std::abs(P.row(i).sum() - 1.0) <= 1e-10, ErrorCode::invalid_argument,
            "row " + std::to_string(i) + " does not sum to 1 within 1e-10");
  }
}

/// Strongly connected components of the support graph of P (iterative
/// Tarjan). comp[i] is the component of state i.
inline std::vector<std::size_t> strong_components(const Matrix& P, std::size_t& count) {
  const std::size_t n = static_cast<std::size_t>(P.rows());
  constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, unset), low(n, 0), comp(n, unset), stack;
  std::vector<bool> on_stack(n, false);
  std::size_t next_index = 0;
  count = 0;
  struct Frame {
    std::size_t v;
    std::size_t next;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unset) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      bool descended = false;
      while (f.next < n) {
        const std::size_t w = f.next++;
        if (P(idx(f.v), idx(w)) <= 0.0) continue;
        if (index[w] == unset) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[f.v] = std::min(low[f.v], index[w]);
      }
      if (descended) continue;
      const std::size_t v = f.v;
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
    }
  }
  return comp;
}

/// Closed communicating classes (components with no edge leaving them).
inline std::vector<std::vector<std::size_t>> closed_classes(const Matrix& P) {
  std::size_t count = 0;
  const auto comp = strong_components(P, count);
  std::vector<bool> leaks(count, false);
  const std::size_t n = comp.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (P(idx(i), idx(j)) > 0.0 && comp[i] != comp[j]) leaks[comp[i]] = true;
  std::vector<std::vector<std::size_t>> classes(count);
  for (std::size_t i = 0; i < n; ++i) classes[comp[i]].push_back(i);
  std::vector<std::vector<std::size_t>> closed;
  for (std::size_t c = 0; c < count; ++c)
    if (!leaks[c]) closed.push_back(classes[c]);
  return closed;
}

}  // namespace detail

/// Left fixed vector of an irreducible row-stochastic P, by a dense solve of
/// p (P - I) = 0 with one equation replaced by sum(p) = 1.
inline Vector stationary(const Matrix& P) {
  detail::check_stochastic(P);
  std::size_t count = 0;
  detail::strong_components(P, count);
  if (count > 1) {
    auto closed = detail::closed_classes(P);
    throw ReducibleChainError("chain is reducible: " + std::to_string(count) + " communicating classes, " +
                                  std::to_string(closed.size()) + " closed",
                              std::move(closed));
  }
  const Eigen::Index n = P.rows();
  Matrix A = P.transpose() - Matrix::Identity(n, n);
  A.row(n - 1).setOnes();
  Vector b = Vector::Zero(n);
  b(n - 1) = 1.0;
  Vector p = A.fullPivLu().solve(b);
  for (Eigen::Index i = 0; i < n; ++i) p(i) = std::max(0.0, p(i));
  return p / p.sum();
}

/// A finite Markov chain with its stationary distribution. States may carry
/// an embedded point (for discretized chains).
struct FiniteChain {
  Matrix P;
  Vector p;
  bool reversible = false;
  std::vector<std::vector<double>> points;  // optional, one per state
  std::vector<std::string> warnings;

  FiniteChain() = default;

  /// Computes p from P; throws ReducibleChainError when P is reducible.
  explicit FiniteChain(Matrix transition) : P(std::move(transition)) {
    p = stationary(P);
    reversible = is_reversible();
  }

  /// Uses a supplied stationary distribution, which must satisfy pP = p.
  FiniteChain(Matrix transition, Vector stationary_dist) : P(std::move(transition)), p(std::move(stationary_dist)) {
    detail::check_stochastic(P);
    detail::require(p.size() == P.rows(), ErrorCode::dimension_mismatch, "stationary vector has the wrong length");
    detail::require(std::abs(p.sum() - 1.0) <= 1e-10 && p.minCoeff() >= 0.0, ErrorCode::invalid_argument,
                    "stationary vector must be a distribution");
    detail::require(stationarity_residual() <= 1e-8, ErrorCode::invalid_argument,
                    "supplied distribution is not stationary (|pP - p| > 1e-8)");
    reversible = is_reversible();
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(P.rows()); }

  double stationarity_residual() const { return (p.transpose() * P - p.transpose()).cwiseAbs().maxCoeff(); }

  /// max |p_i P_ij - p_j P_ji|.
  double balance_residual() const {
    const Matrix Q = p.asDiagonal() * P;
    return (Q - Q.transpose()).cwiseAbs().maxCoeff();
  }

  bool is_reversible(double tol = 1e-8) const { return balance_residual() <= tol; }

  /// Flow Q(x, y) = p(x) P(x, y).
  Matrix flow() const { return p.asDiagonal() * P; }
};

/// Assignment of each state to one of `blocks` non-empty blocks.
struct Partition {
  std::vector<std::size_t> block_of;
  std::size_t blocks = 0;

  Partition() = default;
  explicit Partition(std::vector<std::size_t> assignment) : block_of(std::move(assignment)) {
    blocks = block_of.empty() ? 0 : *std::max_element(block_of.begin(), block_of.end()) + 1;
    std::vector<bool> used(blocks, false);
    for (auto b : block_of) used[b] = true;
    detail::require(std::all_of(used.begin(), used.end(), [](bool u) { return u; }), ErrorCode::invalid_partition,
                    "partition has an empty block");
  }

  static Partition whole(std::size_t n) { return Partition(std::vector<std::size_t>(n, 0)); }
  static Partition singletons(std::size_t n) {
    std::vector<std::size_t> a(n);
    std::iota(a.begin(), a.end(), 0);
    return Partition(std::move(a));
  }

  std::size_t size() const noexcept { return block_of.size(); }

  std::vector<std::size_t> members(std::size_t b) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < block_of.size(); ++i)
      if (block_of[i] == b) out.push_back(i);
    return out;
  }

  std::vector<std::vector<std::size_t>> all_blocks() const {
    std::vector<std::vector<std::size_t>> out(blocks);
    for (std::size_t i = 0; i < block_of.size(); ++i) out[block_of[i]].push_back(i);
    return out;
  }

  /// Every block of *this lies inside a block of `coarser`.
  bool refines(const Partition& coarser) const {
    if (coarser.size() != size()) return false;
    std::vector<std::size_t> image(blocks, std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < size(); ++i) {
      auto& img = image[block_of[i]];
      if (img == std::numeric_limits<std::size_t>::max()) img = coarser.block_of[i];
      else if (img != coarser.block_of[i]) return false;
    }
    return true;
  }

  /// Mass of each block under p.
  std::vector<double> masses(const Vector& p) const {
    detail::require(static_cast<std::size_t>(p.size()) == size(), ErrorCode::dimension_mismatch,
                    "partition and distribution differ in size");
    std::vector<double> m(blocks, 0.0);
    for (std::size_t i = 0; i < size(); ++i) m[block_of[i]] += p(detail::idx(i));
    return m;
  }
};

struct SpectralGap {
  double gap = 0.0;         // lambda_2 of I - P
  double lambda_max = 0.0;  // largest eigenvalue of I - P
  double mixing_gap = 0.0;  // G' = min(lambda_2, 2 - lambda_max)
  Vector eigenvalues;       // of I - P, ascending
};

namespace detail {

/// D^{1/2} (I - P) D^{-1/2}, symmetrized; same spectrum as I - P when reversible.
inline Matrix symmetrized_laplacian(const FiniteChain& chain) {
  const Vector s = chain.p.cwiseSqrt();
  const Vector inv = s.cwiseInverse();
  Matrix S = s.asDiagonal() * chain.P * inv.asDiagonal();
  S = 0.5 * (S + S.transpose());
  return Matrix::Identity(S.rows(), S.cols()) - S;
}

inline void require_reversible(const FiniteChain& chain) {
  if (!chain.is_reversible())
    throw Error(ErrorCode::not_reversible, "chain is not reversible (detailed-balance residual " +
                                               std::to_string(chain.balance_residual()) + ")");
  require(chain.p.minCoeff() > 0.0, ErrorCode::invalid_argument, "stationary distribution must be positive");
}

}  // namespace detail

/// Spectrum of I - P in the p-weighted inner product. A single-state chain
/// has no nonconstant functions; its gap is defined to be 1.
inline SpectralGap spectral_gap(const FiniteChain& chain) {
  detail::require_reversible(chain);
  SpectralGap out;
  if (chain.size() == 1) {
    out.gap = out.lambda_max = out.mixing_gap = 1.0;
    out.eigenvalues = Vector::Zero(1);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(detail::symmetrized_laplacian(chain), Eigen::EigenvaluesOnly);
  out.eigenvalues = solver.eigenvalues();
  out.gap = std::max(0.0, out.eigenvalues(1));
  out.lambda_max = out.eigenvalues(out.eigenvalues.size() - 1);
  out.mixing_gap = std::min(out.gap, 2.0 - out.lambda_max);
  return out;
}

/// phi(S) = Q(S, S^c) / p(S).
inline double conductance(const FiniteChain& chain, const std::vector<std::size_t>& subset) {
  const std::size_t n = chain.size();
  std::vector<bool> in(n, false);
  for (auto s : subset) {
    detail::require(s < n, ErrorCode::invalid_argument, "subset state out of range");
    in[s] = true;
  }
  const std::size_t k = static_cast<std::size_t>(std::count(in.begin(), in.end(), true));
  detail::require(k > 0 && k < n, ErrorCode::invalid_argument, "subset must be non-empty and proper");
  double mass = 0.0, flow = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in[i]) continue;
    mass += chain.p(detail::idx(i));
    for (std::size_t j = 0; j < n; ++j)
      if (!in[j]) flow += chain.p(detail::idx(i)) * chain.P(detail::idx(i), detail::idx(j));
  }
  return flow / mass;
}

struct CheegerResult {
  double value = 0.0;
  std::vector<std::size_t> subset;
  bool exhaustive = false;  // false: Fiedler sweep, an upper estimate of the true minimum
};

/// Phi = min phi(S) over p(S) <= 1/2. Exhaustive for n <= 20, else sweep cuts
/// of the second eigenvector.
inline CheegerResult cheeger_constant(const FiniteChain& chain) {
  const std::size_t n = chain.size();
  detail::require(n >= 2, ErrorCode::invalid_argument, "conductance needs at least two states");
  const Matrix Q = chain.flow();
  CheegerResult best;
  best.value = std::numeric_limits<double>::infinity();
  constexpr double half = 0.5 + 1e-12;
  if (n <= 20) {
    best.exhaustive = true;
    const std::uint32_t limit = 1u << n;
    std::vector<std::size_t> members;
    for (std::uint32_t mask = 1; mask + 1 < limit; ++mask) {
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) mass += chain.p(detail::idx(i));
      if (mass > half) continue;
      double flow = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!(mask & (1u << i))) continue;
        for (std::size_t j = 0; j < n; ++j)
          if (!(mask & (1u << j))) flow += Q(detail::idx(i), detail::idx(j));
      }
      if (flow / mass < best.value) {
        best.value = flow / mass;
        members.clear();
        for (std::size_t i = 0; i < n; ++i)
          if (mask & (1u << i)) members.push_back(i);
        best.subset = members;
      }
    }
    return best;
  }
  detail::require_reversible(chain);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(detail::symmetrized_laplacian(chain));
  const Vector f = solver.eigenvectors().col(1).cwiseQuotient(chain.p.cwiseSqrt());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f(detail::idx(a)) < f(detail::idx(b)); });
  for (int direction = 0; direction < 2; ++direction) {
    if (direction == 1) std::reverse(order.begin(), order.end());
    std::vector<bool> in(n, false);
    double mass = 0.0, flow = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const std::size_t v = order[k];
      // moving v inside removes flow v<->S and adds flow v->S^c
      for (std::size_t j = 0; j < n; ++j) {
        if (j == v) continue;
        if (in[j]) flow -= Q(detail::idx(j), detail::idx(v));
        else flow += Q(detail::idx(v), detail::idx(j));
      }
      in[v] = true;
      mass += chain.p(detail::idx(v));
      if (mass > half) break;
      if (flow / mass < best.value) {
        best.value = flow / mass;
        best.subset.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k + 1));
      }
    }
  }
  std::sort(best.subset.begin(), best.subset.end());
  return best;
}

/// P|_A(x, B) = P(x, B) + 1_B(x) P(x, A^c), on the states of A (in the given
/// order). Its stationary distribution is p conditioned on A for reversible
/// chains, which is asserted. A subset that is not connected under P is
/// accepted with a warning.
inline FiniteChain restrict_chain(const FiniteChain& chain, const std::vector<std::size_t>& subset) {
  const std::size_t k = subset.size();
  detail::require(k > 0, ErrorCode::invalid_argument, "restriction needs a non-empty subset");
  for (auto s : subset) detail::require(s < chain.size(), ErrorCode::invalid_argument, "subset state out of range");
  Matrix R = Matrix::Zero(detail::idx(k), detail::idx(k));
  Vector q(detail::idx(k));
  for (std::size_t a = 0; a < k; ++a) {
    double inside = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
      const double v = chain.P(detail::idx(subset[a]), detail::idx(subset[b]));
      R(detail::idx(a), detail::idx(b)) = v;
      inside += v;
    }
    R(detail::idx(a), detail::idx(a)) += 1.0 - inside;
    q(detail::idx(a)) = chain.p(detail::idx(subset[a]));
  }
  detail::require(q.sum() > 0.0, ErrorCode::invalid_argument, "subset has zero stationary mass");
  q /= q.sum();
  FiniteChain out(std::move(R), std::move(q));
  if (!chain.points.empty())
    for (auto s : subset) out.points.push_back(chain.points[s]);
  std::size_t components = 0;
  detail::strong_components(out.P, components);
  if (components > 1)
    out.warnings.push_back("restricted subset is not connected under P (" + std::to_string(components) +
                           " components)");
  return out;
}

/// P_bar(i, j) = (1/p(A_i)) sum_{x in A_i, y in A_j} p(x) P(x, y); its
/// stationary distribution is the vector of block masses.
inline FiniteChain project(const FiniteChain& chain, const Partition& partition) {
  detail::require(partition.size() == chain.size(), ErrorCode::invalid_partition,
                  "partition does not cover the state space");
  const std::size_t m = partition.blocks;
  Matrix flow = Matrix::Zero(detail::idx(m), detail::idx(m));
  Vector mass = Vector::Zero(detail::idx(m));
  for (std::size_t x = 0; x < chain.size(); ++x) {
    const auto bx = detail::idx(partition.block_of[x]);
    mass(bx) += chain.p(detail::idx(x));
    for (std::size_t y = 0; y < chain.size(); ++y)
      flow(bx, detail::idx(partition.block_of[y])) += chain.p(detail::idx(x)) * chain.P(detail::idx(x), detail::idx(y));
  }
  for (Eigen::Index i = 0; i < flow.rows(); ++i) {
    detail::require(mass(i) > 0.0, ErrorCode::invalid_partition, "partition block has zero stationary mass");
    flow.row(i) /= mass(i);
    flow.row(i) /= flow.row(i).sum();  // absorb rounding so rows are stochastic
  }
  return FiniteChain(std::move(flow), std::move(mass));
}

struct GapProductResult {
  double lhs = 0.0;  // 1/2 Gap(P_bar) min_j Gap(P|_{A_j})
  double gap = 0.0;  // Gap(P)
  double rhs = 0.0;  // Gap(P_bar); +inf for a single block
  bool holds(double tol = 1e-10) const { return lhs <= gap + tol && gap <= rhs + tol; }
};

inline GapProductResult gap_product_check(const FiniteChain& chain, const Partition& partition) {
  GapProductResult r;
  const FiniteChain bar = project(chain, partition);
  const double bar_gap = spectral_gap(bar).gap;
  double min_restricted = std::numeric_limits<double>::infinity();
  for (const auto& block : partition.all_blocks())
    min_restricted = std::min(min_restricted, spectral_gap(restrict_chain(chain, block)).gap);
  r.gap = spectral_gap(chain).gap;
  r.lhs = 0.5 * bar_gap * min_restricted;
  // A one-state projection has no nonconstant test functions: the upper bound is vacuous.
  r.rhs = partition.blocks == 1 ? std::numeric_limits<double>::infinity() : bar_gap;
  return r;
}

struct CheegerCheck {
  double phi = 0.0;
  double gap = 0.0;
  bool holds(double tol = 1e-10) const { return phi * phi / 2.0 <= gap + tol && gap <= 2.0 * phi + tol; }
};

/// Phi^2/2 <= Gap <= 2 Phi.
inline CheegerCheck cheeger_check(const FiniteChain& chain) {
  return {cheeger_constant(chain).value, spectral_gap(chain).gap};
}

struct DominanceCheck {
  Vector chain_eigenvalues;      // first `blocks` eigenvalues of I - P
  Vector projected_eigenvalues;  // eigenvalues of I - P_bar
  bool holds(double tol = 1e-10) const {
    for (Eigen::Index k = 0; k < projected_eigenvalues.size(); ++k)
      if (chain_eigenvalues(k) > projected_eigenvalues(k) + tol) return false;
    return true;
  }
};

/// lambda_k(I - P) <= lambda_k(I - P_bar) for k up to the number of blocks.
inline DominanceCheck projection_dominance_check(const FiniteChain& chain, const Partition& partition) {
  DominanceCheck out;
  const SpectralGap full = spectral_gap(chain);
  const FiniteChain bar = project(chain, partition);
  detail::require_reversible(bar);
  if (bar.size() == 1) {
    out.projected_eigenvalues = Vector::Zero(1);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(detail::symmetrized_laplacian(bar), Eigen::EigenvaluesOnly);
    out.projected_eigenvalues = solver.eigenvalues();
  }
  out.chain_eigenvalues = full.eigenvalues.head(out.projected_eigenvalues.size());
  return out;
}

struct ChiSqDecay {
  std::vector<double> lhs;  // chi^2(p || p^s) for s = 0..t
  std::vector<double> rhs;  // (1 - G')^s chi^2(p || p^0)
  bool holds(double tol = 1e-10) const {
    for (std::size_t s = 0; s < lhs.size(); ++s)
      if (lhs[s] > rhs[s] + tol * std::max(1.0, rhs[s])) return false;
    return true;
  }
};

/// chi^2(p || p^s) <= (1 - G')^s chi^2(p || p^0) for s = 0..t, with exact
/// matrix powers.
inline ChiSqDecay chi_sq_decay_check(const FiniteChain& chain, const Vector& p0, std::size_t t) {
  detail::require(p0.size() == chain.p.size(), ErrorCode::dimension_mismatch, "p0 has the wrong length");
  const double g = spectral_gap(chain).mixing_gap;
  const std::vector<double> p(chain.p.data(), chain.p.data() + chain.p.size());
  ChiSqDecay out;
  Eigen::RowVectorXd current = p0.transpose();
  const double base = chi_sq_divergence(p, std::vector<double>(p0.data(), p0.data() + p0.size()));
  for (std::size_t s = 0; s <= t; ++s) {
    const std::vector<double> ps(current.data(), current.data() + current.size());
    out.lhs.push_back(chi_sq_divergence(p, ps));
    out.rhs.push_back(std::pow(1.0 - g, static_cast<double>(s)) * base);
    current = current * chain.P;
  }
  return out;
}

/// Random reversible chain: symmetric weights W_ij = u_ij^2 (u uniform) and
/// P = W / rowsum, so p is proportional to the row sums.
inline FiniteChain random_reversible_chain(std::size_t n, Rng& rng) {
  detail::require(n >= 1, ErrorCode::invalid_argument, "chain needs at least one state");
  Matrix W(detail::idx(n), detail::idx(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double u = rng.uniform();
      W(detail::idx(i), detail::idx(j)) = W(detail::idx(j), detail::idx(i)) = u * u + 1e-6;
    }
  const Vector rows = W.rowwise().sum();
  Matrix P = rows.cwiseInverse().asDiagonal() * W;
  Vector p = rows / rows.sum();
  return FiniteChain(std::move(P), std::move(p));
}

/// Uniformly random labels in [0, k) with empty blocks removed.
inline Partition random_partition(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> raw(n);
  for (auto& b : raw) b = rng.index(k);
  std::vector<std::size_t> relabel(k, std::numeric_limits<std::size_t>::max());
  std::size_t next = 0;
  for (auto& b : raw) {
    if (relabel[b] == std::numeric_limits<std::size_t>::max()) relabel[b] = next++;
    b = relabel[b];
  }
  return Partition(std::move(raw));
}

}  // namespace stlmc
