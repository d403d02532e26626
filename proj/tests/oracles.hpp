#pragma once

// Reference computations for tests: dense matrices, brute-force searches and
// closed forms, written without reusing any library code path.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline Matrix lower_ones(std::size_t size) {
  Matrix f(size, std::vector<double>(size, 0.0));
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = 0; c <= r; ++c) f[r][c] = 1.0;
  }
  return f;
}

inline Matrix transfer(const std::vector<int>& phi) {
  Matrix t(phi.size(), std::vector<double>(phi.size(), 0.0));
  for (std::size_t i = 0; i < phi.size(); ++i) t[static_cast<std::size_t>(phi[i])][i] = 1.0;
  return t;
}

// Column k spreads over k + d. Offsets strictly inside the truncation get
// interval masses; the two outermost offsets take all remaining tail mass;
// rows beyond the grid fold onto 0 and n.
inline Matrix noise(double sigma, int top) {
  const std::size_t size = static_cast<std::size_t>(top) + 1;
  Matrix r(size, std::vector<double>(size, 0.0));
  if (sigma == 0.0) {
    for (std::size_t k = 0; k < size; ++k) r[k][k] = 1.0;
    return r;
  }
  const int reach = static_cast<int>(std::ceil(6.0 * sigma)) + 1;
  for (int k = 0; k <= top; ++k) {
    for (int d = -reach; d <= reach; ++d) {
      double mass;
      if (d == -reach) {
        mass = normal_cdf((d + 0.5) / sigma);
      } else if (d == reach) {
        mass = 1.0 - normal_cdf((d - 0.5) / sigma);
      } else {
        mass = normal_cdf((d + 0.5) / sigma) - normal_cdf((d - 0.5) / sigma);
      }
      const int row = std::clamp(k + d, 0, top);
      r[static_cast<std::size_t>(row)][static_cast<std::size_t>(k)] += mass;
    }
  }
  return r;
}

inline std::vector<double> mul(const Matrix& a, const std::vector<double>& x) {
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t r = 0; r < a.size(); ++r) {
    for (std::size_t c = 0; c < x.size(); ++c) out[r] += a[r][c] * x[c];
  }
  return out;
}

inline double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

// Earth mover's cost on a line: carry the running surplus from bin to bin.
inline double transport_cost(const std::vector<double>& a, const std::vector<double>& b) {
  double carry = 0.0, cost = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    carry += a[i] - b[i];
    cost += std::abs(carry);
  }
  return cost;
}

// ||F h_obs - F R T h||_1 + lambda sum exp(-rho h) with dense operators.
inline double objective(const std::vector<double>& h, const std::vector<double>& h_obs, const std::vector<int>& phi,
                        double sigma, double lambda, double rho) {
  const int top = static_cast<int>(phi.size()) - 1;
  const Matrix f = lower_ones(phi.size());
  const std::vector<double> model = mul(f, mul(noise(sigma, top), mul(transfer(phi), h)));
  double value = l1(mul(f, h_obs), model);
  for (double v : h) value += lambda * std::exp(-rho * v);
  return value;
}

// Euclidean projection onto the simplex by enumerating every support set.
inline std::vector<double> brute_projection(const std::vector<double>& x) {
  const std::size_t d = x.size();
  std::vector<double> best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (mask & (1u << i)) {
        sum += x[i];
        ++count;
      }
    }
    const double shift = (1.0 - sum) / count;
    std::vector<double> h(d, 0.0);
    bool feasible = true;
    for (std::size_t i = 0; i < d; ++i) {
      if (mask & (1u << i)) {
        h[i] = x[i] + shift;
        feasible = feasible && h[i] >= -1e-15;
      }
    }
    if (!feasible) continue;
    double cost = 0.0;
    for (std::size_t i = 0; i < d; ++i) cost += (x[i] - h[i]) * (x[i] - h[i]);
    if (cost < best_cost) {
      best_cost = cost;
      best = h;
    }
  }
  return best;
}

// Minimum of sum U_k(y_k) + 2 beta * #disagreeing edges over all labelings.
inline std::pair<double, std::vector<std::uint8_t>> exhaustive_labeling(
    const std::vector<std::array<double, 2>>& unaries, const std::vector<std::pair<int, int>>& edges, double beta) {
  const std::size_t m = unaries.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> best_labels(m, 0);
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    double e = 0.0;
    for (std::size_t k = 0; k < m; ++k) e += unaries[k][(mask >> k) & 1u];
    for (const auto& [a, b] : edges) e += 2.0 * beta * (((mask >> a) ^ (mask >> b)) & 1u);
    if (e < best) {
      best = e;
      for (std::size_t k = 0; k < m; ++k) best_labels[k] = (mask >> k) & 1u;
    }
  }
  return {best, best_labels};
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t size, double zero_fraction = 0.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> h(size);
  double sum = 0.0;
  for (double& v : h) {
    v = unit(rng) < zero_fraction ? 0.0 : -std::log(1.0 - unit(rng));
    sum += v;
  }
  if (sum == 0.0) {
    h[0] = 1.0;
    return h;
  }
  for (double& v : h) v /= sum;
  return h;
}

// gamma curve evaluated directly, rounding half away from zero.
inline std::vector<int> gamma_map(double gamma, int top) {
  std::vector<int> phi(static_cast<std::size_t>(top) + 1);
  for (int i = 0; i <= top; ++i) {
    phi[static_cast<std::size_t>(i)] =
        static_cast<int>(std::floor(top * std::pow(static_cast<double>(i) / top, gamma) + 0.5));
  }
  return phi;
}

}  // namespace oracle
