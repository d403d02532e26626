#include "monotone_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cetrace/noise.hpp"

namespace cetrace::detail {

void SparseRows::add_row(double offset, int first, std::span<const double> coef) {
  offset_.push_back(offset);
  first_.push_back(first);
  coef_.insert(coef_.end(), coef.begin(), coef.end());
  start_.push_back(static_cast<int>(coef_.size()));
  if (!coef.empty()) bandwidth_ = std::max(bandwidth_, static_cast<int>(coef.size()) - 1);
}

void SparseRows::residual(std::span<const double> x, std::span<double> out) const {
  for (int r = 0; r < rows(); ++r) {
    double v = offset_[r];
    const auto c = coef(r);
    const double* xr = x.data() + first_[r];
    for (std::size_t k = 0; k < c.size(); ++k) v -= c[k] * xr[k];
    out[r] = v;
  }
}

void SparseRows::add_transpose(std::span<const double> v, std::span<double> out) const {
  for (int r = 0; r < rows(); ++r) {
    const auto c = coef(r);
    double* o = out.data() + first_[r];
    for (std::size_t k = 0; k < c.size(); ++k) o[k] += c[k] * v[r];
  }
}

BandedSpd::BandedSpd(int size, int bandwidth)
    : size_(size),
      bandwidth_(bandwidth),
      data_(static_cast<std::size_t>(size) * (bandwidth + 1), 0.0) {}

void BandedSpd::clear() { std::fill(data_.begin(), data_.end(), 0.0); }

bool BandedSpd::factor() {
  for (int i = 0; i < size_; ++i) {
    const int lo = std::max(0, i - bandwidth_);
    for (int j = lo; j <= i; ++j) {
      double s = data_[index(i, j)];
      for (int k = std::max(lo, j - bandwidth_); k < j; ++k) s -= data_[index(i, k)] * data_[index(j, k)];
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s)) return false;
        data_[index(i, i)] = std::sqrt(s);
      } else {
        data_[index(i, j)] = s / data_[index(j, j)];
      }
    }
  }
  return true;
}

void BandedSpd::solve(std::span<double> rhs) const {
  for (int i = 0; i < size_; ++i) {
    double s = rhs[i];
    for (int k = std::max(0, i - bandwidth_); k < i; ++k) s -= data_[index(i, k)] * rhs[k];
    rhs[i] = s / data_[index(i, i)];
  }
  for (int i = size_ - 1; i >= 0; --i) {
    double s = rhs[i];
    for (int k = i + 1; k <= std::min(size_ - 1, i + bandwidth_); ++k) s -= data_[index(k, i)] * rhs[k];
    rhs[i] = s / data_[index(i, i)];
  }
}

std::vector<double> increments(std::span<const double> x) {
  std::vector<double> g(x.size() + 1);
  double prev = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    g[j] = x[j] - prev;
    prev = x[j];
  }
  g.back() = 1.0 - prev;
  return g;
}

std::vector<double> cumulative_from_increments(std::span<const double> g) {
  std::vector<double> x(g.size() - 1);
  double run = 0.0;
  for (std::size_t j = 0; j + 1 < g.size(); ++j) {
    run += g[j];
    x[j] = run;
  }
  return x;
}

namespace {

class BarrierProblem {
 public:
  BarrierProblem(const SparseRows& rows, std::span<const double> weights, const IncrementPrior& prior)
      : rows_(rows), weights_(weights), prior_(prior), resid_(rows.rows()) {}

  // Change of t * objective - sum log g along x + s * dx, evaluated from
  // the deltas so that large objective values do not cancel.
  // Returns +inf when the step leaves the domain.
  double change(std::span<const double> x, std::span<const double> dx, double s, double t) {
    const std::vector<double> g = increments(x);
    const int unknowns = rows_.unknowns();
    double barrier = 0.0, prior = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double dg = (j < static_cast<std::size_t>(unknowns) ? dx[j] : 0.0) - (j > 0 ? dx[j - 1] : 0.0);
      const double ratio = s * dg / g[j];
      if (!(ratio > -1.0)) return std::numeric_limits<double>::infinity();
      barrier -= std::log1p(ratio);
      if (prior_.lambda > 0.0) {
        const double mj = prior_.mult[j];
        prior += mj * std::exp(-prior_.rho * g[j] / mj) * std::expm1(-prior_.rho * s * dg / mj);
      }
    }
    rows_.residual(x, resid_);
    double quad = 0.0;
    for (int r = 0; r < rows_.rows(); ++r) {
      const auto c = rows_.coef(r);
      const double* d = dx.data() + rows_.first(r);
      double de = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) de -= c[k] * d[k];
      quad += 0.5 * weights_[r] * s * de * (2.0 * resid_[r] + s * de);
    }
    return t * (quad + prior_.lambda * prior) + barrier;
  }

  // Gradient and Hessian of value(x, t).
  void derivatives(std::span<const double> x, double t, std::span<double> grad, BandedSpd& hess) {
    const int unknowns = rows_.unknowns();
    const std::vector<double> g = increments(x);
    rows_.residual(x, resid_);
    std::fill(grad.begin(), grad.end(), 0.0);
    hess.clear();

    std::vector<double> scaled(resid_.size());
    for (std::size_t r = 0; r < resid_.size(); ++r) scaled[r] = -t * weights_[r] * resid_[r];
    rows_.add_transpose(scaled, grad);
    for (int r = 0; r < rows_.rows(); ++r) {
      const auto c = rows_.coef(r);
      const int f = rows_.first(r);
      const double w = t * weights_[r];
      for (std::size_t a = 0; a < c.size(); ++a) {
        const double wa = w * c[a];
        for (std::size_t b = 0; b <= a; ++b) hess.add(f + static_cast<int>(a), f + static_cast<int>(b), wa * c[b]);
      }
    }

    // Terms in the increments: d(g_j)/d(x_j) = 1, d(g_{j+1})/d(x_j) = -1.
    for (std::size_t j = 0; j < g.size(); ++j) {
      double d1 = -1.0 / g[j];
      double d2 = 1.0 / (g[j] * g[j]);
      if (prior_.lambda > 0.0) {
        const double e = prior_.lambda * std::exp(-prior_.rho * g[j] / prior_.mult[j]);
        d1 += -t * prior_.rho * e;
        d2 += t * prior_.rho * prior_.rho * e / prior_.mult[j];
      }
      const int right = static_cast<int>(j);      // unknown x_j (0-based j is x_{j+1})
      const int left = static_cast<int>(j) - 1;   // unknown x_{j-1}
      if (right < unknowns) {
        grad[right] += d1;
        hess.add(right, right, d2);
      }
      if (left >= 0) {
        grad[left] -= d1;
        hess.add(left, left, d2);
      }
      if (right < unknowns && left >= 0) hess.add(right, left, -d2);
    }
  }

 private:
  const SparseRows& rows_;
  std::span<const double> weights_;
  const IncrementPrior& prior_;
  std::vector<double> resid_;
};

// Cholesky with a growing diagonal shift when rounding makes the matrix
// numerically indefinite.
bool factor_with_jitter(BandedSpd& hess) {
  const BandedSpd saved = hess;
  if (hess.factor()) return true;
  double scale = 0.0;
  for (int i = 0; i < saved.size(); ++i) scale = std::max(scale, saved.get(i, i));
  double jitter = 1e-14 * scale;
  for (int attempt = 0; attempt < 6 && std::isfinite(jitter) && jitter > 0.0; ++attempt, jitter *= 100.0) {
    hess = saved;
    for (int i = 0; i < saved.size(); ++i) hess.add(i, i, jitter);
    if (hess.factor()) return true;
  }
  return false;
}

}  // namespace

std::vector<double> barrier_newton(const SparseRows& rows, std::span<const double> weights,
                                   const IncrementPrior& prior, std::vector<double> x,
                                   const BarrierOptions& opt) {
  const int unknowns = rows.unknowns();
  if (unknowns == 0) return x;
  BarrierProblem problem(rows, weights, prior);
  BandedSpd hess(unknowns, std::max(1, rows.bandwidth()));
  std::vector<double> grad(unknowns), step(unknowns), trial(unknowns);
  const double count = unknowns + 1.0;

  bool stalled = false;
  for (double t = opt.t_initial; !stalled; t *= opt.t_growth) {
    for (int it = 0; it < opt.newton_max; ++it) {
      problem.derivatives(x, t, grad, hess);
      if (!factor_with_jitter(hess)) {
        stalled = true;
        break;
      }
      for (int i = 0; i < unknowns; ++i) step[i] = -grad[i];
      hess.solve(step);
      double decrement = 0.0;
      for (int i = 0; i < unknowns; ++i) decrement -= grad[i] * step[i];
      // Centered once the predicted gain, in objective units, is negligible.
      if (!(decrement / 2.0 > opt.newton_tol) || decrement / (2.0 * t) <= opt.precision) break;

      // Largest step keeping every increment positive, then Armijo backtracking.
      const std::vector<double> g = increments(x);
      double s = 1.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double dg = (j < static_cast<std::size_t>(unknowns) ? step[j] : 0.0) - (j > 0 ? step[j - 1] : 0.0);
        if (dg < 0.0) s = std::min(s, -0.99 * g[j] / dg);
      }
      bool moved = false;
      for (int halving = 0; halving < 60; ++halving, s *= 0.5) {
        if (problem.change(x, step, s, t) <= -0.25 * s * decrement) {
          moved = true;
          break;
        }
      }
      if (!moved) {
        stalled = true;
        break;
      }
      bool changed = false;
      for (int i = 0; i < unknowns; ++i) {
        trial[i] = x[i] + s * step[i];
        changed = changed || trial[i] != x[i];
      }
      if (!changed) {
        stalled = true;
        break;
      }
      x.swap(trial);
    }
    if (count / t < opt.gap) break;
  }
  return x;
}

void append_noise_rows(SparseRows& rows, std::span<const double> c_obs, const NoiseMatrix& noise,
                       std::span<const int> below) {
  const int top = noise.top();
  const int reach = noise.reach();
  const int m = rows.unknowns() + 1;
  std::vector<double> coef;
  for (int k = 0; k < top; ++k) {
    double offset = c_obs[k];
    int first = -1;
    coef.clear();
    // Offsets d run downward so the level k - d, and hence the unknown, increases.
    for (int d = reach; d >= -reach; --d) {
      const double r = noise.band(d);
      const int level = k - d;
      if (level < 0 || r == 0.0) continue;
      const int slot = level >= top ? m : below[level];
      if (slot == 0) continue;
      if (slot == m) {
        offset -= r;
        continue;
      }
      const int col = slot - 1;
      if (first < 0) first = col;
      if (col - first >= static_cast<int>(coef.size())) coef.resize(col - first + 1, 0.0);
      coef[col - first] += r;
    }
    rows.add_row(offset, first < 0 ? 0 : first, coef);
  }
}

}  // namespace cetrace::detail
