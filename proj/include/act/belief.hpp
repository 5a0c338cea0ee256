#pragma once

// Categorical distributions and column-stochastic matrices.
//
// Storage is sparse (only nonzero entries are kept) but every type behaves as a
// dense vector/matrix: operator[] / at() return 0 for absent entries. The large
// benchmark models (RockSample(7,8) has ~12.8k states and ~26k outcomes per
// action) are far too big to hold densely, while nearly every column and every
// belief that occurs during planning has only a handful of nonzeros.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace act {

inline constexpr double NORM_TOL = 1e-9;
inline constexpr double EQ_TOL = 1e-7;
inline constexpr double LOG_FLOOR_EXPONENT = -32.0;
inline const double LOG_FLOOR = std::exp(LOG_FLOOR_EXPONENT);

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// ln(max(p, exp(-32))).
inline double floored_log(double p) {
    return p > LOG_FLOOR ? std::log(p) : LOG_FLOOR_EXPONENT;
}

/// -p ln p with 0 ln 0 := 0.
inline double entropy_term(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

struct Entry {
    std::uint32_t index;
    double value;
};

/// Sort entries by index, sum duplicates and drop exact zeros.
void compact(std::vector<Entry>& entries);

/// Normalized probability mass over {0, ..., size-1}.
class Categorical {
public:
    Categorical() = default;

    /// Checked: entries must be nonnegative and sum to 1 within NORM_TOL.
    explicit Categorical(std::span<const double> dense);
    Categorical(std::initializer_list<double> dense);

    /// Checked construction from (index, value) pairs; duplicates are summed.
    static Categorical from_entries(std::size_t size, std::vector<Entry> entries);
    /// Rescales nonnegative mass to sum 1. Throws when the total mass is zero.
    static Categorical normalize(std::size_t size, std::vector<Entry> entries);
    static Categorical normalize(std::span<const double> dense);
    static Categorical point(std::size_t size, std::size_t index);
    static Categorical uniform(std::size_t size);

    std::size_t size() const { return size_; }
    double operator[](std::size_t i) const;
    std::span<const Entry> support() const { return entries_; }
    std::vector<double> dense() const;
    double sum() const;
    /// Index of the largest entry; lowest index wins ties.
    std::size_t argmax() const;

private:
    std::size_t size_ = 0;
    std::vector<Entry> entries_;
};

/// ln of a probability vector, floored at exp(-32).
class LogVector {
public:
    LogVector() = default;
    explicit LogVector(std::vector<double> values) : values_(std::move(values)) {}
    static LogVector of(const Categorical& p);

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }
    std::vector<double> exp() const;

private:
    std::vector<double> values_;
};

/// Column-stochastic matrix: entry (i, j) = P(i | j).
class StochasticMatrix {
public:
    StochasticMatrix() = default;

    /// Row-major dense input; columns must sum to 1 within NORM_TOL.
    static StochasticMatrix from_dense(const std::vector<std::vector<double>>& rows);
    /// Same as from_dense without the column check (loading and validation paths).
    static StochasticMatrix unchecked(const std::vector<std::vector<double>>& rows);
    /// Checked construction from per-column sparse entries.
    static StochasticMatrix from_columns(std::size_t rows, std::vector<std::vector<Entry>> columns);
    static StochasticMatrix unchecked_columns(std::size_t rows, std::vector<std::vector<Entry>> columns);
    static StochasticMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return start_.empty() ? 0 : start_.size() - 1; }
    double at(std::size_t i, std::size_t j) const;
    std::span<const Entry> column(std::size_t j) const;
    double column_sum(std::size_t j) const;
    /// Columns whose sum deviates from 1 by more than NORM_TOL, or that hold negative entries.
    std::vector<std::size_t> bad_columns() const;
    std::vector<std::vector<double>> dense() const;
    std::size_t nonzeros() const { return entries_.size(); }

private:
    static StochasticMatrix build(std::size_t rows, std::vector<std::vector<Entry>> columns);

    std::size_t rows_ = 0;
    std::vector<std::size_t> start_;
    std::vector<Entry> entries_;
};

/// exp(logits) / sum exp(logits), stabilized by max-subtraction; -inf entries get 0.
Categorical softmax(std::span<const double> logits);

/// KL[q || p] with 0 ln 0 := 0; +inf when q puts mass where p has none.
double kl_divergence(const Categorical& q, const Categorical& p);

/// Component j = entropy of column j.
std::vector<double> entropy_vector(const StochasticMatrix& a);
double column_entropy(const StochasticMatrix& a, std::size_t j);

Categorical matvec(const StochasticMatrix& m, const Categorical& v);

/// Kronecker product in factor order (first factor varies slowest).
Categorical kron(std::span<const Categorical> factors);
StochasticMatrix kron(std::span<const StochasticMatrix> factors);
/// Column-wise Kronecker (Khatri-Rao) product of likelihood factors sharing one
/// column index: column j of the result is the Kronecker product of the factors' columns j.
StochasticMatrix column_kron(std::span<const StochasticMatrix> factors);

}  // namespace act
