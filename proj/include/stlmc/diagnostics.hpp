#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "stlmc/divergence.hpp"
#include "stlmc/error.hpp"
#include "stlmc/mixture.hpp"
#include "stlmc/quadrature.hpp"
#include "stlmc/tempering.hpp"

namespace stlmc {

/// Counts on a uniform grid over a box [lo, hi]^d (same box on every axis),
/// with points outside the box tallied separately. Mergeable.
class Histogram {
 public:
  Histogram(std::size_t dim, double lo, double hi, std::size_t bins_per_axis)
      : dim_(dim), lo_(lo), hi_(hi), bins_(bins_per_axis) {
    detail::require(dim >= 1 && dim <= 2, ErrorCode::unsupported_dimension, "histograms support d <= 2");
    detail::require(hi > lo, ErrorCode::invalid_argument, "histogram box must have hi > lo");
    detail::require(bins_per_axis >= 1, ErrorCode::invalid_argument, "need at least one bin");
    counts_.assign(dim == 1 ? bins_ : bins_ * bins_, 0);
  }

  /// Box [-D - 6 sigma, D + 6 sigma]^d with 100 bins per axis.
  static Histogram for_mixture(const GaussianMixture& mixture, std::size_t bins_per_axis = 100) {
    const double h = mixture.radius() + 6.0 * std::sqrt(mixture.sigma2());
    return Histogram(mixture.dim(), -h, h, bins_per_axis);
  }

  void add(std::span<const double> x) {
    detail::require(x.size() == dim_, ErrorCode::dimension_mismatch, "point dimension differs from histogram");
    ++total_;
    std::size_t flat = 0;
    for (std::size_t j = 0; j < dim_; ++j) {
      if (!(x[j] >= lo_ && x[j] < hi_)) {
        ++outside_;
        return;
      }
      const auto b = std::min(bins_ - 1, static_cast<std::size_t>((x[j] - lo_) / width()));
      flat = flat * bins_ + b;
    }
    ++counts_[flat];
  }

  void add_all(const std::vector<Point>& points) {
    for (const auto& p : points) add(p);
  }

  void merge(const Histogram& other) {
    detail::require(other.dim_ == dim_ && other.lo_ == lo_ && other.hi_ == hi_ && other.bins_ == bins_,
                    ErrorCode::invalid_argument, "cannot merge histograms on different grids");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    total_ += other.total_;
    outside_ += other.outside_;
  }

  std::size_t dim() const noexcept { return dim_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t bins_per_axis() const noexcept { return bins_; }
  double width() const noexcept { return (hi_ - lo_) / static_cast<double>(bins_); }
  std::size_t total() const noexcept { return total_; }
  std::size_t outside() const noexcept { return outside_; }
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }

  double edge(std::size_t k) const { return lo_ + static_cast<double>(k) * width(); }

  /// Empirical mass per bin (flattened, row-major for d = 2).
  std::vector<double> masses() const {
    std::vector<double> m(counts_.size(), 0.0);
    if (total_ == 0) return m;
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
    return m;
  }

  double outside_mass() const {
    return total_ == 0 ? 0.0 : static_cast<double>(outside_) / static_cast<double>(total_);
  }

  /// One row per bin: lower edges, upper edges, count, mass.
  void write_csv(std::ostream& os) const {
    os << "# stlmc histogram v1\n";
    if (dim_ == 1) {
      os << "lo_1,hi_1,count,mass\n";
      for (std::size_t k = 0; k < bins_; ++k)
        os << edge(k) << ',' << edge(k + 1) << ',' << counts_[k] << ','
           << (total_ ? static_cast<double>(counts_[k]) / static_cast<double>(total_) : 0.0) << '\n';
    } else {
      os << "lo_1,hi_1,lo_2,hi_2,count,mass\n";
      for (std::size_t a = 0; a < bins_; ++a)
        for (std::size_t b = 0; b < bins_; ++b) {
          const std::size_t c = counts_[a * bins_ + b];
          os << edge(a) << ',' << edge(a + 1) << ',' << edge(b) << ',' << edge(b + 1) << ',' << c << ','
             << (total_ ? static_cast<double>(c) / static_cast<double>(total_) : 0.0) << '\n';
        }
    }
    os << "# outside," << outside_ << ",total," << total_ << '\n';
  }

 private:
  std::size_t dim_;
  double lo_, hi_;
  std::size_t bins_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
  std::size_t outside_ = 0;
};

/// Exact mass of p_beta in each bin of `hist`, by quadrature.
template <Target T>
std::vector<double> exact_bin_masses(const Histogram& hist, const T& target, double beta = 1.0) {
  detail::require(hist.dim() == target.dim(), ErrorCode::dimension_mismatch, "histogram and target dimensions differ");
  const double log_z = log_partition_function(target, beta);
  QuadratureOptions per_bin;
  per_bin.panels = 1;
  per_bin.abs_tol = 1e-12;
  const std::size_t b = hist.bins_per_axis();
  std::vector<double> out(hist.counts().size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::array<double, 2> lo{}, hi{};
    if (hist.dim() == 1) {
      lo[0] = hist.edge(k);
      hi[0] = hist.edge(k + 1);
    } else {
      lo = {hist.edge(k / b), hist.edge(k % b)};
      hi = {hist.edge(k / b + 1), hist.edge(k % b + 1)};
    }
    const std::span<const double> l(lo.data(), hist.dim()), h(hi.data(), hist.dim());
    out[k] = std::exp(std::log(integrate_boltzmann(target, beta, l, h, per_bin)) - log_z);
  }
  return out;
}

/// Half the l1 distance between the histogram and exact bin masses, plus
/// half of the empirical and exact mass outside the box, counted as error.
inline double tv_distance(const Histogram& hist, std::span<const double> exact_masses) {
  const std::vector<double> emp = hist.masses();
  double inside = 0.0;
  for (double m : exact_masses) inside += m;
  return tv_distance(emp, exact_masses) + 0.5 * (hist.outside_mass() + std::max(0.0, 1.0 - inside));
}

template <Target T>
double tv_distance(const Histogram& hist, const T& target, double beta = 1.0) {
  return tv_distance(hist, exact_bin_masses(hist, target, beta));
}

struct ModeOccupancy {
  std::vector<double> fractions;  // per center
  double unassigned = 0.0;
  std::size_t total = 0;
};

/// Fraction of points within `radius` of each center (nearest center wins);
/// the rest is reported as unassigned.
inline ModeOccupancy mode_occupancy(const std::vector<Point>& points, const std::vector<Point>& centers,
                                    double radius) {
  detail::require(!centers.empty(), ErrorCode::invalid_argument, "need at least one mode center");
  detail::require(radius > 0.0, ErrorCode::invalid_argument, "radius must be positive");
  ModeOccupancy out;
  out.fractions.assign(centers.size(), 0.0);
  out.total = points.size();
  if (points.empty()) return out;
  const double r2 = radius * radius;
  std::size_t unassigned = 0;
  for (const auto& x : points) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.size(); ++i) {
      detail::require(centers[i].size() == x.size(), ErrorCode::dimension_mismatch, "center dimension differs");
      const double d = detail::squared_distance(x, centers[i]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best_d <= r2) out.fractions[best] += 1.0;
    else ++unassigned;
  }
  const double n = static_cast<double>(points.size());
  for (double& f : out.fractions) f /= n;
  out.unassigned = static_cast<double>(unassigned) / n;
  return out;
}

/// Occupancy of the trace points recorded on `level` (0-based).
inline ModeOccupancy mode_occupancy(const std::vector<TraceRecord>& trace, std::size_t level,
                                    const std::vector<Point>& centers, double radius) {
  std::vector<Point> pts;
  for (const auto& rec : trace)
    if (rec.level == level) pts.push_back(rec.x);
  return mode_occupancy(pts, centers, radius);
}

}  // namespace stlmc
