#include "act/belief.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace act {

void compact(std::vector<Entry>& entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.index < b.index; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < entries.size();) {
        Entry merged = entries[i];
        std::size_t j = i + 1;
        while (j < entries.size() && entries[j].index == merged.index) merged.value += entries[j++].value;
        if (merged.value != 0.0) entries[out++] = merged;
        i = j;
    }
    entries.resize(out);
}

namespace {

std::vector<Entry> entries_of(std::span<const double> dense) {
    std::vector<Entry> out;
    for (std::size_t i = 0; i < dense.size(); ++i)
        if (dense[i] != 0.0) out.push_back({static_cast<std::uint32_t>(i), dense[i]});
    return out;
}

void check_distribution(std::size_t size, const std::vector<Entry>& entries) {
    double total = 0.0;
    for (const auto& e : entries) {
        if (e.index >= size) throw Error("categorical: index out of range");
        if (!(e.value >= 0.0) || !std::isfinite(e.value)) throw Error("categorical: negative or non-finite entry");
        total += e.value;
    }
    if (std::abs(total - 1.0) > NORM_TOL) {
        std::ostringstream msg;
        msg << "categorical: entries sum to " << total << ", expected 1";
        throw Error(msg.str());
    }
}

}  // namespace

Categorical::Categorical(std::span<const double> dense) : size_(dense.size()), entries_(entries_of(dense)) {
    check_distribution(size_, entries_);
}

Categorical::Categorical(std::initializer_list<double> dense)
    : Categorical(std::span<const double>(dense.begin(), dense.size())) {}

Categorical Categorical::from_entries(std::size_t size, std::vector<Entry> entries) {
    compact(entries);
    check_distribution(size, entries);
    Categorical c;
    c.size_ = size;
    c.entries_ = std::move(entries);
    return c;
}

Categorical Categorical::normalize(std::size_t size, std::vector<Entry> entries) {
    compact(entries);
    double total = 0.0;
    for (const auto& e : entries) {
        if (e.index >= size) throw Error("categorical: index out of range");
        if (!(e.value >= 0.0)) throw Error("categorical: negative mass");
        total += e.value;
    }
    if (!(total > 0.0) || !std::isfinite(total)) throw Error("categorical: zero total mass");
    for (auto& e : entries) e.value /= total;
    Categorical c;
    c.size_ = size;
    c.entries_ = std::move(entries);
    return c;
}

Categorical Categorical::normalize(std::span<const double> dense) {
    return normalize(dense.size(), entries_of(dense));
}

Categorical Categorical::point(std::size_t size, std::size_t index) {
    if (index >= size) throw Error("categorical: point index out of range");
    Categorical c;
    c.size_ = size;
    c.entries_ = {{static_cast<std::uint32_t>(index), 1.0}};
    return c;
}

Categorical Categorical::uniform(std::size_t size) {
    if (size == 0) throw Error("categorical: empty support");
    std::vector<double> dense(size, 1.0 / static_cast<double>(size));
    return normalize(dense);
}

double Categorical::operator[](std::size_t i) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                               [](const Entry& e, std::size_t idx) { return e.index < idx; });
    return (it != entries_.end() && it->index == i) ? it->value : 0.0;
}

std::vector<double> Categorical::dense() const {
    std::vector<double> out(size_, 0.0);
    for (const auto& e : entries_) out[e.index] = e.value;
    return out;
}

double Categorical::sum() const {
    double total = 0.0;
    for (const auto& e : entries_) total += e.value;
    return total;
}

std::size_t Categorical::argmax() const {
    std::size_t best = 0;
    double best_value = -1.0;
    for (const auto& e : entries_)
        if (e.value > best_value) {
            best_value = e.value;
            best = e.index;
        }
    return best;
}

LogVector LogVector::of(const Categorical& p) {
    std::vector<double> values(p.size(), LOG_FLOOR_EXPONENT);
    for (const auto& e : p.support()) values[e.index] = floored_log(e.value);
    return LogVector(std::move(values));
}

std::vector<double> LogVector::exp() const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = std::exp(values_[i]);
    return out;
}

StochasticMatrix StochasticMatrix::build(std::size_t rows, std::vector<std::vector<Entry>> columns) {
    StochasticMatrix m;
    m.rows_ = rows;
    m.start_.reserve(columns.size() + 1);
    m.start_.push_back(0);
    for (auto& col : columns) {
        compact(col);
        for (const auto& e : col) {
            if (e.index >= rows) throw Error("stochastic matrix: row index out of range");
            m.entries_.push_back(e);
        }
        m.start_.push_back(m.entries_.size());
    }
    return m;
}

StochasticMatrix StochasticMatrix::unchecked(const std::vector<std::vector<double>>& rows) {
    const std::size_t n_rows = rows.size();
    const std::size_t n_cols = rows.empty() ? 0 : rows.front().size();
    std::vector<std::vector<Entry>> columns(n_cols);
    for (std::size_t i = 0; i < n_rows; ++i) {
        if (rows[i].size() != n_cols) throw Error("stochastic matrix: ragged rows");
        for (std::size_t j = 0; j < n_cols; ++j)
            if (rows[i][j] != 0.0) columns[j].push_back({static_cast<std::uint32_t>(i), rows[i][j]});
    }
    return build(n_rows, std::move(columns));
}

StochasticMatrix StochasticMatrix::from_dense(const std::vector<std::vector<double>>& rows) {
    auto m = unchecked(rows);
    if (auto bad = m.bad_columns(); !bad.empty())
        throw Error("stochastic matrix: column " + std::to_string(bad.front()) + " is not a distribution");
    return m;
}

StochasticMatrix StochasticMatrix::from_columns(std::size_t rows, std::vector<std::vector<Entry>> columns) {
    auto m = build(rows, std::move(columns));
    if (auto bad = m.bad_columns(); !bad.empty())
        throw Error("stochastic matrix: column " + std::to_string(bad.front()) + " is not a distribution");
    return m;
}

StochasticMatrix StochasticMatrix::unchecked_columns(std::size_t rows, std::vector<std::vector<Entry>> columns) {
    return build(rows, std::move(columns));
}

StochasticMatrix StochasticMatrix::identity(std::size_t n) {
    std::vector<std::vector<Entry>> columns(n);
    for (std::size_t j = 0; j < n; ++j) columns[j] = {{static_cast<std::uint32_t>(j), 1.0}};
    return build(n, std::move(columns));
}

double StochasticMatrix::at(std::size_t i, std::size_t j) const {
    for (const auto& e : column(j))
        if (e.index == i) return e.value;
    return 0.0;
}

std::span<const Entry> StochasticMatrix::column(std::size_t j) const {
    if (j + 1 >= start_.size()) throw Error("stochastic matrix: column out of range");
    return std::span<const Entry>(entries_.data() + start_[j], start_[j + 1] - start_[j]);
}

double StochasticMatrix::column_sum(std::size_t j) const {
    double total = 0.0;
    for (const auto& e : column(j)) total += e.value;
    return total;
}

std::vector<std::size_t> StochasticMatrix::bad_columns() const {
    std::vector<std::size_t> bad;
    for (std::size_t j = 0; j < cols(); ++j) {
        bool negative = false;
        for (const auto& e : column(j)) negative |= !(e.value >= 0.0);
        if (negative || std::abs(column_sum(j) - 1.0) > NORM_TOL) bad.push_back(j);
    }
    return bad;
}

std::vector<std::vector<double>> StochasticMatrix::dense() const {
    std::vector<std::vector<double>> out(rows_, std::vector<double>(cols(), 0.0));
    for (std::size_t j = 0; j < cols(); ++j)
        for (const auto& e : column(j)) out[e.index][j] = e.value;
    return out;
}

Categorical softmax(std::span<const double> logits) {
    double top = -std::numeric_limits<double>::infinity();
    for (double x : logits) top = std::max(top, x);
    if (!std::isfinite(top)) throw Error("softmax: empty support");
    std::vector<Entry> entries;
    entries.reserve(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (logits[i] == -std::numeric_limits<double>::infinity()) continue;
        double w = std::exp(logits[i] - top);
        if (w > 0.0) entries.push_back({static_cast<std::uint32_t>(i), w});
    }
    return Categorical::normalize(logits.size(), std::move(entries));
}

double kl_divergence(const Categorical& q, const Categorical& p) {
    if (q.size() != p.size()) throw Error("kl_divergence: mismatched supports");
    double total = 0.0;
    for (const auto& e : q.support()) {
        double pi = p[e.index];
        if (pi <= 0.0) return std::numeric_limits<double>::infinity();
        total += e.value * (std::log(e.value) - std::log(pi));
    }
    return std::max(total, 0.0);
}

double column_entropy(const StochasticMatrix& a, std::size_t j) {
    double h = 0.0;
    for (const auto& e : a.column(j)) h += entropy_term(e.value);
    return h;
}

std::vector<double> entropy_vector(const StochasticMatrix& a) {
    std::vector<double> h(a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) h[j] = column_entropy(a, j);
    return h;
}

Categorical matvec(const StochasticMatrix& m, const Categorical& v) {
    if (m.cols() != v.size()) throw Error("matvec: dimension mismatch");
    std::vector<Entry> out;
    for (const auto& x : v.support())
        for (const auto& e : m.column(x.index)) out.push_back({e.index, e.value * x.value});
    return Categorical::normalize(m.rows(), std::move(out));
}

Categorical kron(std::span<const Categorical> factors) {
    if (factors.empty()) throw Error("kron: no factors");
    Categorical acc = factors.front();
    for (std::size_t f = 1; f < factors.size(); ++f) {
        const auto& next = factors[f];
        std::vector<Entry> out;
        for (const auto& a : acc.support())
            for (const auto& b : next.support())
                out.push_back({static_cast<std::uint32_t>(a.index * next.size() + b.index), a.value * b.value});
        acc = Categorical::from_entries(acc.size() * next.size(), std::move(out));
    }
    return acc;
}

StochasticMatrix kron(std::span<const StochasticMatrix> factors) {
    if (factors.empty()) throw Error("kron: no factors");
    StochasticMatrix acc = factors.front();
    for (std::size_t f = 1; f < factors.size(); ++f) {
        const auto& next = factors[f];
        std::vector<std::vector<Entry>> columns(acc.cols() * next.cols());
        for (std::size_t ja = 0; ja < acc.cols(); ++ja)
            for (std::size_t jb = 0; jb < next.cols(); ++jb) {
                auto& col = columns[ja * next.cols() + jb];
                for (const auto& a : acc.column(ja))
                    for (const auto& b : next.column(jb))
                        col.push_back({static_cast<std::uint32_t>(a.index * next.rows() + b.index), a.value * b.value});
            }
        acc = StochasticMatrix::from_columns(acc.rows() * next.rows(), std::move(columns));
    }
    return acc;
}

StochasticMatrix column_kron(std::span<const StochasticMatrix> factors) {
    if (factors.empty()) throw Error("column_kron: no factors");
    const std::size_t cols = factors.front().cols();
    for (const auto& f : factors)
        if (f.cols() != cols) throw Error("column_kron: factors disagree on column count");
    std::vector<std::vector<Entry>> columns(cols);
    std::size_t rows = 1;
    for (const auto& f : factors) rows *= f.rows();
    for (std::size_t j = 0; j < cols; ++j) {
        std::vector<Entry> acc{{0, 1.0}};
        for (const auto& f : factors) {
            std::vector<Entry> next;
            for (const auto& a : acc)
                for (const auto& b : f.column(j))
                    next.push_back({static_cast<std::uint32_t>(a.index * f.rows() + b.index), a.value * b.value});
            acc = std::move(next);
        }
        columns[j] = std::move(acc);
    }
    return StochasticMatrix::from_columns(rows, std::move(columns));
}

}  // namespace act
