#pragma once

// Univariate polynomials over Z (in the indeterminate n) and reduced
// rational functions over Q(n). Used for symbolic derivation of the
// transition matrices; degrees stay small (<= d + 2), so all algorithms
// here are the classical quadratic ones.

#include <gmpxx.h>

#include <algorithm>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hw {

class IntPoly {
public:
    IntPoly() = default;
    IntPoly(std::initializer_list<long> c) {
        for (long v : c) coeffs_.emplace_back(v);
        trim();
    }
    explicit IntPoly(std::vector<mpz_class> c) : coeffs_(std::move(c)) { trim(); }
    static IntPoly constant(const mpz_class& c) { return IntPoly(std::vector<mpz_class>{c}); }
    /// a*n + b
    static IntPoly linear(const mpz_class& a, const mpz_class& b) {
        return IntPoly(std::vector<mpz_class>{b, a});
    }

    bool is_zero() const { return coeffs_.empty(); }
    /// Degree; -1 for the zero polynomial.
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<mpz_class>& coeffs() const { return coeffs_; }
    const mpz_class& lead() const { return coeffs_.back(); }
    mpz_class coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(coeffs_.size())) ? coeffs_[k] : mpz_class(0);
    }

    mpz_class operator()(const mpz_class& x) const {
        mpz_class acc = 0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            acc *= x;
            acc += *it;
        }
        return acc;
    }

    /// gcd of the coefficients, nonnegative (0 for the zero polynomial).
    mpz_class content() const {
        mpz_class g = 0;
        for (const auto& c : coeffs_) {
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
            if (g == 1) break;
        }
        return g;
    }

    IntPoly primitive_part() const {
        if (is_zero()) return {};
        mpz_class c = content();
        if (lead() < 0) c = -c;
        return divexact(c);
    }

    IntPoly divexact(const mpz_class& c) const {
        IntPoly out = *this;
        for (auto& v : out.coeffs_) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), c.get_mpz_t());
        return out;
    }

    IntPoly operator-() const {
        IntPoly out = *this;
        for (auto& v : out.coeffs_) v = -v;
        return out;
    }

    IntPoly& operator+=(const IntPoly& o) {
        if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
        for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
        trim();
        return *this;
    }
    IntPoly& operator-=(const IntPoly& o) { return *this += -o; }
    IntPoly& operator*=(const mpz_class& c) {
        if (c == 0) {
            coeffs_.clear();
            return *this;
        }
        for (auto& v : coeffs_) v *= c;
        return *this;
    }

    friend IntPoly operator+(IntPoly a, const IntPoly& b) { return a += b; }
    friend IntPoly operator-(IntPoly a, const IntPoly& b) { return a -= b; }
    friend IntPoly operator*(IntPoly a, const mpz_class& c) { return a *= c; }
    friend IntPoly operator*(const mpz_class& c, IntPoly a) { return a *= c; }
    friend IntPoly operator*(const IntPoly& a, const IntPoly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<mpz_class> c(a.coeffs_.size() + b.coeffs_.size() - 1);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j)
                mpz_addmul(c[i + j].get_mpz_t(), a.coeffs_[i].get_mpz_t(), b.coeffs_[j].get_mpz_t());
        return IntPoly(std::move(c));
    }
    IntPoly& operator*=(const IntPoly& o) { return *this = *this * o; }

    friend bool operator==(const IntPoly& a, const IntPoly& b) { return a.coeffs_ == b.coeffs_; }

    /// Pseudo-remainder: lead(b)^(deg a - deg b + 1) * a mod b.
    static IntPoly pseudo_remainder(IntPoly a, const IntPoly& b) {
        if (b.is_zero()) throw std::domain_error("pseudo_remainder: zero divisor");
        const int db = b.degree();
        int steps = std::max(a.degree() - db + 1, 0);
        while (!a.is_zero() && a.degree() >= db) {
            const int shift = a.degree() - db;
            const mpz_class la = a.lead();
            a *= b.lead();
            for (int k = 0; k <= db; ++k) a.coeffs_[k + shift] -= la * b.coeffs_[k];
            a.trim();
            --steps;
        }
        // Degree drops of more than one skip steps; make up the missing factors.
        for (; steps > 0 && !a.is_zero(); --steps) a *= b.lead();
        return a;
    }

    /// True iff b divides a in Z[n]; the quotient is stored when requested.
    static bool divides(const IntPoly& b, const IntPoly& a, IntPoly* quotient = nullptr) {
        if (b.is_zero()) return a.is_zero();
        IntPoly rem = a;
        std::vector<mpz_class> q(std::max(0, a.degree() - b.degree() + 1));
        while (!rem.is_zero() && rem.degree() >= b.degree()) {
            const int shift = rem.degree() - b.degree();
            if (!mpz_divisible_p(rem.lead().get_mpz_t(), b.lead().get_mpz_t())) return false;
            mpz_class t = rem.lead() / b.lead();
            q[shift] = t;
            for (int k = 0; k <= b.degree(); ++k) rem.coeffs_[k + shift] -= t * b.coeffs_[k];
            rem.trim();
        }
        if (!rem.is_zero()) return false;
        if (quotient) *quotient = IntPoly(std::move(q));
        return true;
    }

    /// Greatest common divisor in Z[n], with positive leading coefficient.
    static IntPoly gcd(const IntPoly& a, const IntPoly& b) {
        if (a.is_zero()) return b.is_zero() ? IntPoly{} : b.normalized_sign();
        if (b.is_zero()) return a.normalized_sign();
        mpz_class c;
        mpz_gcd(c.get_mpz_t(), a.content().get_mpz_t(), b.content().get_mpz_t());
        IntPoly x = a.primitive_part(), y = b.primitive_part();
        if (x.degree() < y.degree()) std::swap(x, y);
        while (!y.is_zero()) {
            IntPoly r = pseudo_remainder(x, y);
            x = std::move(y);
            y = r.primitive_part();
        }
        return x.primitive_part() * c;
    }

    IntPoly normalized_sign() const { return (!is_zero() && lead() < 0) ? -*this : *this; }

    std::string to_string(const char* var = "n") const {
        if (is_zero()) return "0";
        std::ostringstream os;
        for (std::size_t k = 0; k < coeffs_.size(); ++k) {
            if (k) os << " + ";
            os << coeffs_[k].get_str();
            if (k >= 1) os << '*' << var;
            if (k >= 2) os << '^' << k;
        }
        return os.str();
    }
    friend std::ostream& operator<<(std::ostream& os, const IntPoly& p) { return os << p.to_string(); }

private:
    void trim() {
        while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
    }
    std::vector<mpz_class> coeffs_;
};

/// num/den in lowest terms with den's leading coefficient positive.
class RationalFunction {
public:
    RationalFunction() : num_(), den_(IntPoly{1}) {}
    RationalFunction(IntPoly num, IntPoly den) : num_(std::move(num)), den_(std::move(den)) {
        if (den_.is_zero()) throw std::domain_error("RationalFunction: zero denominator");
        reduce();
    }
    static RationalFunction constant(long c) { return {IntPoly{c}, IntPoly{1}}; }

    const IntPoly& num() const { return num_; }
    const IntPoly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }

    friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.den_ == b.den_) return {a.num_ + b.num_, a.den_};
        IntPoly g = IntPoly::gcd(a.den_, b.den_);
        IntPoly ad, bd;
        IntPoly::divides(g, a.den_, &ad);
        IntPoly::divides(g, b.den_, &bd);
        return {a.num_ * bd + b.num_ * ad, a.den_ * bd};
    }
    friend RationalFunction operator*(const RationalFunction& a, const IntPoly& c) {
        return {a.num_ * c, a.den_};
    }
    RationalFunction divided_by(const IntPoly& c) const {
        if (c.is_zero()) throw std::domain_error("RationalFunction: division by zero polynomial");
        return {num_, den_ * c};
    }
    friend bool operator==(const RationalFunction& a, const RationalFunction& b) {
        return a.num_ * b.den_ == b.num_ * a.den_;
    }

private:
    void reduce() {
        if (num_.is_zero()) {
            den_ = IntPoly{1};
            return;
        }
        IntPoly g = IntPoly::gcd(num_, den_);
        if (!(g == IntPoly{1})) {
            IntPoly::divides(g, num_, &num_);
            IntPoly::divides(g, den_, &den_);
        }
        if (den_.lead() < 0) {
            num_ = -num_;
            den_ = -den_;
        }
    }
    IntPoly num_;
    IntPoly den_;
};

}  // namespace hw
