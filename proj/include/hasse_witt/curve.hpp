#pragma once

// Hyperelliptic curve model y^2 = f(x), discriminant, and the admissible
// prime enumeration (segmented sieve).

#include "hasse_witt/int_poly.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hw {

enum class CurveErrorKind { ZeroLeading, UnsupportedGenus, NotSquarefree };

class CurveError : public std::invalid_argument {
public:
    CurveError(CurveErrorKind kind, const std::string& what) : std::invalid_argument(what), kind_(kind) {}
    CurveErrorKind kind() const { return kind_; }

private:
    CurveErrorKind kind_;
};

struct CurveModel {
    std::vector<mpz_class> coeffs;  // f_0 .. f_d, ascending
    int degree = 0;
    int genus = 0;
    int dim = 0;  // recurrence dimension r
    bool zero_constant = false;
    mpz_class discriminant;

    const mpz_class& f(int k) const { return coeffs[k]; }
    const mpz_class& lead() const { return coeffs.back(); }
};

namespace detail {

inline mpz_class mpz_pow(const mpz_class& b, unsigned long e) {
    mpz_class r;
    mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
    return r;
}

}  // namespace detail

/// Res(a, b) via the subresultant PRS (exact over Z).
inline mpz_class resultant(IntPoly a, IntPoly b) {
    using detail::mpz_pow;
    if (a.is_zero() || b.is_zero()) return 0;
    mpz_class s = 1;
    if (a.degree() < b.degree()) {
        std::swap(a, b);
        if ((a.degree() & 1) && (b.degree() & 1)) s = -1;
    }
    const mpz_class ca = a.content(), cb = b.content();
    mpz_class t = mpz_pow(ca, b.degree()) * mpz_pow(cb, a.degree());
    a = a.divexact(ca);
    b = b.divexact(cb);
    mpz_class g = 1, h = 1;
    while (b.degree() > 0) {
        const int delta = a.degree() - b.degree();
        if ((a.degree() & 1) && (b.degree() & 1)) s = -s;
        IntPoly r = IntPoly::pseudo_remainder(a, b);
        a = std::move(b);
        b = r.divexact(g * mpz_pow(h, delta));
        g = a.lead();
        // h <- g^delta / h^(delta - 1)
        mpz_class num = mpz_pow(g, delta), den = mpz_pow(h, delta - 1);
        mpz_divexact(h.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    }
    if (b.is_zero()) return 0;
    // h^(1 - deg a) * lead(b)^deg a
    const int da = a.degree();
    mpz_class num = mpz_pow(b.lead(), da), res;
    if (da >= 1) {
        mpz_class den = mpz_pow(h, da - 1);
        mpz_divexact(res.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    } else {
        res = num * h;
    }
    return s * t * res;
}

inline IntPoly derivative(const IntPoly& f) {
    std::vector<mpz_class> c;
    for (int k = 1; k <= f.degree(); ++k) c.push_back(f.coeff(k) * k);
    return IntPoly(std::move(c));
}

/// disc(f) = (-1)^(d(d-1)/2) Res(f, f') / f_d.
inline mpz_class discriminant(std::span<const mpz_class> coeffs) {
    IntPoly f(std::vector<mpz_class>(coeffs.begin(), coeffs.end()));
    const int d = f.degree();
    if (d < 1) return 0;
    if (d == 1) return 1;
    mpz_class res = resultant(f, derivative(f));
    mpz_divexact(res.get_mpz_t(), res.get_mpz_t(), f.lead().get_mpz_t());
    if ((d * (d - 1) / 2) & 1) res = -res;
    return res;
}

inline CurveModel validate_curve(std::vector<mpz_class> coeffs) {
    if (coeffs.empty() || coeffs.back() == 0)
        throw CurveError(CurveErrorKind::ZeroLeading, "leading coefficient must be nonzero");
    const int d = static_cast<int>(coeffs.size()) - 1;
    if (d < 3 || d > 8)
        throw CurveError(CurveErrorKind::UnsupportedGenus,
                         "degree " + std::to_string(d) + " gives a genus outside [1, 3]");
    CurveModel c;
    c.degree = d;
    c.genus = (d - 1) / 2;
    c.zero_constant = coeffs[0] == 0;
    c.dim = c.zero_constant ? d - 1 : d;
    c.discriminant = discriminant(coeffs);
    if (c.discriminant == 0) throw CurveError(CurveErrorKind::NotSquarefree, "f is not squarefree");
    c.coeffs = std::move(coeffs);
    return c;
}

inline CurveModel validate_curve(std::initializer_list<long> coeffs) {
    std::vector<mpz_class> v;
    for (long x : coeffs) v.emplace_back(x);
    return validate_curve(std::move(v));
}

/// Odd primes p <= n in ascending order: segmented Eratosthenes, window of 2^20.
template <class Fn>
void for_each_odd_prime(std::uint64_t n, Fn&& fn) {
    if (n < 3) return;
    const std::uint64_t root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n))) + 1;
    std::vector<char> small(root + 1, 1);
    std::vector<std::uint64_t> base;
    for (std::uint64_t i = 2; i <= root; ++i) {
        if (!small[i]) continue;
        if (i > 2) base.push_back(i);
        for (std::uint64_t j = i * i; j <= root; j += i) small[j] = 0;
    }
    constexpr std::uint64_t kWindow = std::uint64_t{1} << 20;
    std::vector<char> seg(kWindow);
    for (std::uint64_t lo = 3; lo <= n; lo += kWindow) {
        const std::uint64_t hi = std::min(n + 1, lo + kWindow);
        std::fill(seg.begin(), seg.begin() + (hi - lo), 1);
        for (std::uint64_t q : base) {
            if (q * q >= hi) break;
            std::uint64_t start = std::max(q * q, (lo + q - 1) / q * q);
            for (std::uint64_t j = start; j < hi; j += q) seg[j - lo] = 0;
        }
        for (std::uint64_t x = lo | 1; x < hi; x += 2)
            if (seg[x - lo]) fn(x);
    }
}

struct SkippedPrime {
    std::uint64_t p;
    std::string reason;
};

struct AdmissiblePrimeSet {
    std::uint64_t bound = 0;
    std::vector<std::uint64_t> primes;
    std::vector<SkippedPrime> skipped;
};

/// Empty string if p is admissible, otherwise the reason it is not.
inline std::string inadmissibility_reason(const CurveModel& c, std::uint64_t p) {
    if (p == 2) return "even";
    auto divides = [p](const mpz_class& x) { return mpz_divisible_ui_p(x.get_mpz_t(), p) != 0; };
    if (divides(c.lead())) return "divides leading coefficient";
    if (!c.zero_constant && divides(c.f(0))) return "divides constant coefficient";
    if (c.zero_constant && divides(c.f(1))) return "divides linear coefficient";
    if (divides(c.discriminant)) return "divides discriminant";
    return {};
}

inline AdmissiblePrimeSet admissible_primes(const CurveModel& c, std::uint64_t bound) {
    AdmissiblePrimeSet out;
    out.bound = bound;
    for_each_odd_prime(bound, [&](std::uint64_t p) {
        std::string why = inadmissibility_reason(c, p);
        if (why.empty())
            out.primes.push_back(p);
        else
            out.skipped.push_back({p, std::move(why)});
    });
    return out;
}

}  // namespace hw
