#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace hw {

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of arbitrary-precision integers. Row vectors are
/// 1 x r matrices.
class IntMatrix {
public:
    IntMatrix() = default;
    IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    IntMatrix(std::size_t rows, std::size_t cols, std::vector<mpz_class> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows * cols) throw DimensionMismatch("IntMatrix: data size");
    }
    IntMatrix(std::initializer_list<std::initializer_list<long>> rows) {
        rows_ = rows.size();
        cols_ = rows.size() ? rows.begin()->size() : 0;
        for (const auto& row : rows) {
            if (row.size() != cols_) throw DimensionMismatch("IntMatrix: ragged initializer");
            for (long v : row) data_.emplace_back(v);
        }
    }

    static IntMatrix identity(std::size_t r) {
        IntMatrix m(r, r);
        for (std::size_t i = 0; i < r; ++i) m(i, i) = 1;
        return m;
    }
    static IntMatrix row_vector(std::vector<mpz_class> v) {
        const std::size_t n = v.size();
        return IntMatrix(1, n, std::move(v));
    }
    static IntMatrix scalar(const mpz_class& x) { return IntMatrix(1, 1, {x}); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }

    mpz_class& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const mpz_class& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::vector<mpz_class>& data() { return data_; }
    const std::vector<mpz_class>& data() const { return data_; }

    bool is_zero() const {
        for (const auto& x : data_)
            if (x != 0) return false;
        return true;
    }

    /// Largest bit length of any entry (0 for the zero matrix).
    std::size_t max_bits() const {
        std::size_t b = 0;
        for (const auto& x : data_)
            if (x != 0) b = std::max(b, mpz_sizeinbase(x.get_mpz_t(), 2));
        return b;
    }

    /// Limb storage currently held by the entries.
    std::size_t bytes() const {
        std::size_t b = 0;
        for (const auto& x : data_) b += mpz_size(x.get_mpz_t()) * sizeof(mp_limb_t);
        return b;
    }

    /// Reduce every entry into [0, m); m >= 1.
    IntMatrix& reduce_mod(const mpz_class& m) {
        if (m == 1) {
            for (auto& x : data_) x = 0;
            return *this;
        }
        for (auto& x : data_) mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
        return *this;
    }

    friend bool operator==(const IntMatrix& a, const IntMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    friend std::ostream& operator<<(std::ostream& os, const IntMatrix& m) {
        os << '[';
        for (std::size_t i = 0; i < m.rows_; ++i) {
            os << (i ? ", [" : "[");
            for (std::size_t j = 0; j < m.cols_; ++j) os << (j ? ", " : "") << m(i, j).get_str();
            os << ']';
        }
        return os << ']';
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<mpz_class> data_;
};

inline IntMatrix mat_mul_classical(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("mat_mul_classical: inner dimensions differ");
    IntMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const mpz_class& x = a(i, k);
            if (x == 0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                mpz_addmul(c(i, j).get_mpz_t(), x.get_mpz_t(), b(k, j).get_mpz_t());
        }
    return c;
}

}  // namespace hw
