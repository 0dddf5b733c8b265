#include "bees/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bees/error.hpp"
#include "vexp.hpp"

namespace bees {

bool is_probability_vector(std::span<const double> p, double tol) noexcept {
  if (p.empty()) return false;
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= -tol) || !std::isfinite(x)) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}

ProbVector::ProbVector(std::vector<double> entries) : p_(std::move(entries)) {
  if (p_.empty()) throw DimensionError("probability vector must be nonempty");
  if (!is_probability_vector(p_)) {
    throw ParameterError("entries are not a probability vector (negative entry or sum != 1)");
  }
}

ProbVector ProbVector::uniform(std::size_t size) {
  if (size == 0) throw DimensionError("uniform distribution over an empty set");
  return unchecked(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

ProbVector ProbVector::point_mass(std::size_t size, std::size_t index) {
  if (index >= size) throw IndexError("point mass index out of range");
  std::vector<double> p(size, 0.0);
  p[index] = 1.0;
  return unchecked(std::move(p));
}

ProbVector ProbVector::unchecked(std::vector<double> entries) noexcept {
  ProbVector v;
  v.p_ = std::move(entries);
  return v;
}

LogWeightVector::LogWeightVector(std::vector<double> log_w) : lw_(std::move(log_w)) {
  for (double x : lw_) {
    if (!std::isfinite(x)) throw ParameterError("log-weights must be finite");
  }
}

LogWeightVector LogWeightVector::zeros(std::size_t size) {
  LogWeightVector v;
  v.lw_.assign(size, 0.0);
  return v;
}

AdviceMatrix::AdviceMatrix(std::size_t experts, std::size_t actions)
    : experts_(experts), actions_(actions), data_(experts * actions, 0.0) {}

AdviceMatrix AdviceMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw DimensionError("advice matrix must be nonempty");
  AdviceMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.actions_) {
      throw DimensionError("ragged advice matrix: row " + std::to_string(i) + " has " +
                           std::to_string(rows[i].size()) + " entries, expected " +
                           std::to_string(m.actions_));
    }
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

void AdviceMatrix::resize(std::size_t experts, std::size_t actions) {
  experts_ = experts;
  actions_ = actions;
  data_.resize(experts * actions);
}

void AdviceMatrix::validate_rows() const {
  for (std::size_t i = 0; i < experts_; ++i) {
    if (!is_probability_vector(row(i))) {
      throw DimensionError("advice row " + std::to_string(i) + " is not a probability vector");
    }
  }
}

double log_sum_exp(std::span<const double> x) noexcept {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

void normalize_log_weights_into(std::span<const double> lw, std::span<double> out) noexcept {
  const double m = *std::max_element(lw.begin(), lw.end());
  const double s = detail::exp_shifted(lw.data(), m, out.data(), lw.size());
  const double inv = 1.0 / s;
  for (double& v : out) v *= inv;
}

ProbVector normalize_log_weights(const LogWeightVector& lw) {
  if (lw.empty()) throw DimensionError("cannot normalize an empty weight vector");
  for (double x : lw.values()) {
    if (!std::isfinite(x)) throw ParameterError("log-weights must be finite");
  }
  std::vector<double> q(lw.size());
  normalize_log_weights_into(lw.values(), q);
  return ProbVector::unchecked(std::move(q));
}

void mix_advice_into(std::span<const double> q, const AdviceMatrix& advice, double rho,
                     std::span<double> out) noexcept {
  const std::size_t k = advice.actions();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < advice.experts(); ++i) {
    const double qi = q[i];
    const double* xi = advice.row(i).data();
    for (std::size_t a = 0; a < k; ++a) out[a] += qi * xi[a];
  }
  const double keep = 1.0 - static_cast<double>(k) * rho;
  for (double& p : out) p = keep * p + rho;
}

ProbVector mix_advice(const ProbVector& q, const AdviceMatrix& advice, double rho) {
  const std::size_t k = advice.actions();
  if (k == 0 || advice.experts() == 0) throw DimensionError("advice matrix must be nonempty");
  if (q.size() != advice.experts()) {
    throw DimensionError("expert distribution has " + std::to_string(q.size()) +
                         " entries but advice has " + std::to_string(advice.experts()) + " rows");
  }
  if (!(rho > 0.0) || rho > 1.0 / static_cast<double>(k)) {
    throw ParameterError("rho must lie in (0, 1/K]");
  }
  advice.validate_rows();
  std::vector<double> p(k);
  mix_advice_into(q.values(), advice, rho, p);
  return ProbVector::unchecked(std::move(p));
}

std::size_t sample_index(std::span<const double> p, double u) noexcept {
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a] <= 0.0) continue;
    last_positive = a;
    acc += p[a];
    if (u < acc) return a;
  }
  // Rounding left u above the accumulated mass.
  return last_positive;
}

std::size_t sample_categorical(const ProbVector& p, RngStream& rng) {
  if (p.empty()) throw DimensionError("cannot sample from an empty distribution");
  return sample_index(p.values(), rng.next_uniform());
}

void project_to_simplex_inplace(std::span<double> v) noexcept {
  double sum = 0.0;
  for (double& x : v) {
    x = x > 0.0 ? x : 0.0;
    sum += x;
  }
  if (sum > 0.0) {
    const double inv = 1.0 / sum;
    for (double& x : v) x *= inv;
  } else {
    const double u = 1.0 / static_cast<double>(v.size());
    for (double& x : v) x = u;
  }
}

ProbVector project_to_simplex(std::span<const double> v) {
  if (v.empty()) throw DimensionError("cannot project an empty vector");
  std::vector<double> out(v.begin(), v.end());
  for (double x : out) {
    if (!std::isfinite(x)) throw ParameterError("projection input must be finite");
  }
  project_to_simplex_inplace(out);
  return ProbVector::unchecked(std::move(out));
}

}  // namespace bees
