#include "cpn/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace cpn {
namespace {

double sq_dist(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double d = x[c] - y[c];
    s += d * d;
  }
  return s;
}

// Sum in ascending order so that results do not depend on match enumeration
// order; keeps w2_exact bit-symmetric and reproducible across routes.
double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double v : terms) s += v;
  return s;
}

std::vector<double> sorted_scalars(const EmpiricalMeasure& m) {
  std::vector<double> v(m.atoms_flat().begin(), m.atoms_flat().end());
  std::sort(v.begin(), v.end());
  return v;
}

// Partial Fisher-Yates: first `k` entries of a random permutation of 0..n-1.
std::vector<std::size_t> subsample_indexes(std::size_t n, std::size_t k,
                                           RandomStream& stream) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(stream.uniform(0.0, 1.0) *
                                     static_cast<double>(n - i));
    std::swap(idx[i], idx[std::min(j, n - 1)]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> atoms, int dim)
    : atoms_(std::move(atoms)), dim_(dim) {
  if (dim_ < 1) throw InputError("EmpiricalMeasure: dim must be >= 1");
  if (atoms_.empty() || atoms_.size() % static_cast<std::size_t>(dim_) != 0)
    throw InputError("EmpiricalMeasure: atom buffer size must be a positive multiple of dim");
  for (double v : atoms_)
    if (!std::isfinite(v)) throw InputError("EmpiricalMeasure: atoms must be finite");

  const std::size_t n = size();
  mean_.assign(static_cast<std::size_t>(dim_), 0.0);
  second_moment_ = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = atom(i);
    for (std::size_t c = 0; c < static_cast<std::size_t>(dim_); ++c) {
      mean_[c] += x[c];
      second_moment_ += x[c] * x[c];
    }
  }
  for (auto& v : mean_) v /= static_cast<double>(n);
  second_moment_ /= static_cast<double>(n);
}

double EmpiricalMeasure::variance() const {
  double msq = 0.0;
  for (double v : mean_) msq += v * v;
  return std::max(0.0, second_moment_ - msq);
}

MeasurePath::MeasurePath(std::vector<double> breakpoints,
                         std::vector<EmpiricalMeasure> segments)
    : breakpoints_(std::move(breakpoints)), segments_(std::move(segments)) {
  if (breakpoints_.empty() || breakpoints_.size() != segments_.size())
    throw InputError("MeasurePath: need one segment per breakpoint");
  if (breakpoints_.front() != 0.0)
    throw InputError("MeasurePath: first breakpoint must be 0");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i)
    if (!(breakpoints_[i] > breakpoints_[i - 1]))
      throw InputError("MeasurePath: breakpoints must be strictly increasing");
  for (const auto& s : segments_)
    if (s.dim() != segments_.front().dim())
      throw InputError("MeasurePath: segments must share one dimension");
}

MeasurePath MeasurePath::constant(EmpiricalMeasure m) {
  std::vector<EmpiricalMeasure> segs;
  segs.push_back(std::move(m));
  return MeasurePath({0.0}, std::move(segs));
}

const EmpiricalMeasure& MeasurePath::value_at(double t) const {
  if (segments_.empty()) throw InputError("MeasurePath: lookup on an empty path");
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  const std::size_t idx =
      it == breakpoints_.begin()
          ? 0
          : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return segments_[idx];
}

const EmpiricalMeasure& MeasurePath::left_limit(double t) const {
  if (segments_.empty()) throw InputError("MeasurePath: lookup on an empty path");
  auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
  std::size_t idx = static_cast<std::size_t>(it - breakpoints_.begin());
  // At an exact breakpoint the left limit is the previous segment.
  if (idx > 0) --idx;
  return segments_[idx];
}

double w2_to_dirac(const EmpiricalMeasure& m, std::span<const double> target) {
  if (target.size() != static_cast<std::size_t>(m.dim()))
    throw InputError("w2_to_dirac: target dimension mismatch");
  std::vector<double> terms(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) terms[i] = sq_dist(m.atom(i), target);
  return std::sqrt(sorted_sum(terms) / static_cast<double>(m.size()));
}

double w2_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.dim() != 1 || b.dim() != 1) throw InputError("w2_1d: atoms must be scalar");
  if (a.size() != b.size()) throw InputError("w2_1d: sizes must match");
  auto xs = sorted_scalars(a);
  auto ys = sorted_scalars(b);
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - ys[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(xs.size()));
}

double w2_1d_sorted(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("w2_1d_sorted: empty atom list");
  // Walk the common quantile refinement of the two uniform grids.
  const std::size_t n = a.size(), m = b.size();
  std::size_t i = 0, j = 0;
  double lo = 0.0, s = 0.0;
  while (i < n && j < m) {
    const double qa = static_cast<double>(i + 1) / static_cast<double>(n);
    const double qb = static_cast<double>(j + 1) / static_cast<double>(m);
    const double hi = std::min(qa, qb);
    const double d = a[i] - b[j];
    s += d * d * (hi - lo);
    lo = hi;
    if (qa <= qb) ++i;
    if (qb <= qa) ++j;
  }
  return std::sqrt(s);
}

std::vector<int> min_cost_assignment(std::span<const double> cost,
                                     std::size_t n) {
  if (n == 0 || cost.size() != n * n)
    throw InputError("min_cost_assignment: cost must be n x n with n >= 1");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Shortest augmenting paths with dual potentials (exact for real costs).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (std::size_t j = 1; j <= n; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  return row_to_col;
}

double w2_exact(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                std::size_t cap) {
  if (a.dim() != b.dim()) throw InputError("w2_exact: dimension mismatch");
  if (a.size() != b.size()) throw InputError("w2_exact: sizes must match");
  const std::size_t n = a.size();
  if (n > cap)
    throw InputError("w2_exact: population " + std::to_string(n) +
                     " exceeds cap " + std::to_string(cap) +
                     "; use w2_sliced for large populations");
  if (a.dim() == 1) {
    // The sorted coupling is optimal in one dimension; skip the solver but
    // keep the canonical sorted summation.
    auto xs = sorted_scalars(a);
    auto ys = sorted_scalars(b);
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = xs[i] - ys[i];
      terms[i] = d * d;
    }
    return std::sqrt(sorted_sum(terms) / static_cast<double>(n));
  }
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i * n + j] = sq_dist(a.atom(i), b.atom(j));
  const auto match = min_cost_assignment(cost, n);
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i)
    terms[i] = cost[i * n + static_cast<std::size_t>(match[i])];
  return std::sqrt(sorted_sum(terms) / static_cast<double>(n));
}

double w2_sliced(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                 int projections, RandomStream& stream) {
  if (a.dim() != b.dim()) throw InputError("w2_sliced: dimension mismatch");
  if (projections < 1) throw InputError("w2_sliced: projections must be >= 1");
  const int d = a.dim();
  std::vector<double> dir(static_cast<std::size_t>(d));
  std::vector<double> pa(a.size()), pb(b.size());
  double acc = 0.0;
  for (int p = 0; p < projections; ++p) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& v : dir) {
        v = stream.normal();
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& v : dir) v /= norm;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto x = a.atom(i);
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += dir[static_cast<std::size_t>(c)] * x[static_cast<std::size_t>(c)];
      pa[i] = s;
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto x = b.atom(i);
      double s = 0.0;
      for (int c = 0; c < d; ++c) s += dir[static_cast<std::size_t>(c)] * x[static_cast<std::size_t>(c)];
      pb[i] = s;
    }
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    const double w = w2_1d_sorted(pa, pb);
    acc += w * w;
  }
  return std::sqrt(acc / static_cast<double>(projections));
}

double product_coupling_bound(const EmpiricalMeasure& a,
                              const EmpiricalMeasure& b) {
  if (a.dim() != b.dim()) throw InputError("product_coupling_bound: dimension mismatch");
  if (a.size() != b.size()) throw InputError("product_coupling_bound: sizes must match");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += sq_dist(a.atom(i), b.atom(i));
  return std::sqrt(s / static_cast<double>(a.size()));
}

double w2_population(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                     std::size_t cap, RandomStream* subsample_stream) {
  if (a.dim() != b.dim()) throw InputError("w2_population: dimension mismatch");
  const std::size_t n = a.size(), m = b.size();
  if (n == m) {
    if (a.dim() == 1 || n <= cap) return w2_exact(a, b, std::max(cap, n));
    throw InputError("w2_population: equal sizes above cap in dimension > 1; use w2_sliced");
  }

  const std::size_t g = std::gcd(n, m);
  const std::size_t l = (n / g) * m;
  const bool replicate = n * m <= cap * cap;

  if (replicate && a.dim() == 1) {
    auto xs = sorted_scalars(a);
    auto ys = sorted_scalars(b);
    return w2_1d_sorted(xs, ys);
  }
  if (replicate && l <= cap) {
    auto expand = [](const EmpiricalMeasure& src, std::size_t total) {
      const std::size_t rep = total / src.size();
      std::vector<double> atoms;
      atoms.reserve(total * static_cast<std::size_t>(src.dim()));
      for (std::size_t i = 0; i < src.size(); ++i)
        for (std::size_t r = 0; r < rep; ++r)
          atoms.insert(atoms.end(), src.atom(i).begin(), src.atom(i).end());
      return EmpiricalMeasure(std::move(atoms), src.dim());
    };
    return w2_exact(expand(a, l), expand(b, l), cap);
  }

  // Subsample the larger population down to the smaller with a seeded draw.
  if (subsample_stream == nullptr)
    throw InputError("w2_population: size mix requires a subsample stream");
  const EmpiricalMeasure& small = n < m ? a : b;
  const EmpiricalMeasure& big = n < m ? b : a;
  const auto keep = subsample_indexes(big.size(), small.size(), *subsample_stream);
  std::vector<double> atoms;
  atoms.reserve(small.size() * static_cast<std::size_t>(big.dim()));
  for (std::size_t i : keep)
    atoms.insert(atoms.end(), big.atom(i).begin(), big.atom(i).end());
  EmpiricalMeasure reduced(std::move(atoms), big.dim());
  if (small.dim() == 1 || small.size() <= cap)
    return w2_exact(small, reduced, std::max(cap, small.size()));
  throw InputError("w2_population: reduced size above cap in dimension > 1; use w2_sliced");
}

}  // namespace cpn
