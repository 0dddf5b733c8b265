#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bees/rng.hpp"

namespace bees {

// Absolute tolerance used when probability vectors cross an API boundary.
inline constexpr double kProbTolerance = 1e-9;

bool is_probability_vector(std::span<const double> p, double tol = kProbTolerance) noexcept;

// Probability distribution over a finite set (actions or experts).
// Construction validates nonnegativity and unit sum within kProbTolerance.
class ProbVector {
 public:
  ProbVector() = default;
  explicit ProbVector(std::vector<double> entries);

  static ProbVector uniform(std::size_t size);
  static ProbVector point_mass(std::size_t size, std::size_t index);
  // Skips validation; for values produced by code that already guarantees it.
  static ProbVector unchecked(std::vector<double> entries) noexcept;

  std::size_t size() const noexcept { return p_.size(); }
  bool empty() const noexcept { return p_.empty(); }
  double operator[](std::size_t i) const noexcept { return p_[i]; }
  std::span<const double> values() const noexcept { return p_; }
  const std::vector<double>& vector() const noexcept { return p_; }
  auto begin() const noexcept { return p_.begin(); }
  auto end() const noexcept { return p_.end(); }

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<double> p_;
};

// Natural-log expert weights. Entries must be finite.
class LogWeightVector {
 public:
  LogWeightVector() = default;
  explicit LogWeightVector(std::vector<double> log_w);
  static LogWeightVector zeros(std::size_t size);

  std::size_t size() const noexcept { return lw_.size(); }
  bool empty() const noexcept { return lw_.empty(); }
  double operator[](std::size_t i) const noexcept { return lw_[i]; }
  double& operator[](std::size_t i) noexcept { return lw_[i]; }
  std::span<const double> values() const noexcept { return lw_; }
  std::span<double> values() noexcept { return lw_; }
  const std::vector<double>& vector() const noexcept { return lw_; }

  friend bool operator==(const LogWeightVector&, const LogWeightVector&) = default;

 private:
  std::vector<double> lw_;
};

// Dense row-major N x K matrix of advice; row i is expert i's distribution
// over the K actions.
class AdviceMatrix {
 public:
  AdviceMatrix() = default;
  AdviceMatrix(std::size_t experts, std::size_t actions);
  // Throws DimensionError on ragged or empty input.
  static AdviceMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t experts() const noexcept { return experts_; }
  std::size_t actions() const noexcept { return actions_; }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * actions_, actions_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * actions_, actions_};
  }
  double operator()(std::size_t i, std::size_t a) const noexcept { return data_[i * actions_ + a]; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  // Keeps the allocation when shrinking or when the size is unchanged.
  void resize(std::size_t experts, std::size_t actions);
  // Throws DimensionError if any row is not a probability vector.
  void validate_rows() const;

 private:
  std::size_t experts_ = 0;
  std::size_t actions_ = 0;
  std::vector<double> data_;
};

double log_sum_exp(std::span<const double> x) noexcept;

// q_i = exp(lw_i - logsumexp(lw)). Throws DimensionError on empty input and
// ParameterError on non-finite entries.
ProbVector normalize_log_weights(const LogWeightVector& lw);
// Unchecked kernel; `out` must have the same length as `lw`.
void normalize_log_weights_into(std::span<const double> lw, std::span<double> out) noexcept;

// p_a = (1 - K rho) sum_i q_i xi^i_a + rho.
ProbVector mix_advice(const ProbVector& q, const AdviceMatrix& advice, double rho);
// Unchecked kernel used inside learners.
void mix_advice_into(std::span<const double> q, const AdviceMatrix& advice, double rho,
                     std::span<double> out) noexcept;

// Consumes exactly one draw of `rng`.
std::size_t sample_categorical(const ProbVector& p, RngStream& rng);
// Inverse-CDF selection for a uniform u in [0,1). Never returns an index with
// zero probability.
std::size_t sample_index(std::span<const double> p, double u) noexcept;

// Clamp to [0, inf) and renormalize; uniform when nothing positive remains.
ProbVector project_to_simplex(std::span<const double> v);
void project_to_simplex_inplace(std::span<double> v) noexcept;

}  // namespace bees
