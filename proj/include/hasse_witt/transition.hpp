#pragma once

// Transition matrices for the coefficient windows of f^n.
//
// For row index i the window v_n = [f^n_{2in+i-r}, ..., f^n_{2in+i-1}]
// satisfies v_{n+1} * D(n) = v_n * M(n), with M an r x r matrix over Z[n]
// and D in Z[n]. The matrices are derived symbolically: the window is
// extended to the right and to the left using the relations that follow
// from f * (f^n)' = n * f' * f^n, and v_{n+1} is then read off from
// f^{n+1} = f * f^n.
//
// Window positions are tracked by their offset c relative to 2in, so a
// coefficient f^n_{2in+c} is stored under key c.

#include "hasse_witt/curve.hpp"
#include "hasse_witt/int_matrix.hpp"
#include "hasse_witt/int_poly.hpp"

#include <gmpxx.h>

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hw {

class DivisionByZeroPolynomial : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ZeroDenominatorAtIndex : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A tracked coefficient f^n_k written as a Q(n)-linear combination of the
/// r entries of v_n.
using RationalFunctionRow = std::vector<RationalFunction>;

struct PrecisionParameters {
    int e = 1;  // moduli are p^e
    int w = 0;  // trailing transitions handled exactly per prime
};

struct TransitionSystem {
    int row = 1;  // i in [1, g]
    int dim = 0;  // r
    std::vector<IntPoly> M;  // r x r, row-major
    IntPoly D;
    PrecisionParameters precision;

    const IntPoly& entry(int s, int t) const { return M[s * dim + t]; }
    RationalFunction rational_entry(int s, int t) const { return {entry(s, t), D}; }
};

/// The moduli exponent and tail length used for a curve of this shape.
/// Safe mode uses p^(d+1) with no tail.
inline PrecisionParameters precision_parameters(const CurveModel& c, int row, bool safe_mode = false) {
    if (safe_mode) return {c.degree + 1, 0};
    switch (c.genus) {
        case 1:
            return c.degree == 4 ? PrecisionParameters{1, 2} : PrecisionParameters{1, 0};
        case 2:
            // Sextics: the second row's tail carries one more factor of p.
            return c.degree == 6 && row == 2 ? PrecisionParameters{2, 2} : PrecisionParameters{2, 1};
        case 3:
            return {3, 3};
        default:
            return {c.degree + 1, 0};
    }
}

namespace detail {

inline RationalFunctionRow zero_row(int r) { return RationalFunctionRow(r); }

inline void axpy(RationalFunctionRow& acc, const IntPoly& coef, const RationalFunctionRow& x) {
    if (coef.is_zero()) return;
    for (std::size_t s = 0; s < acc.size(); ++s)
        if (!x[s].is_zero()) acc[s] = acc[s] + x[s] * coef;
}

inline RationalFunctionRow divide_row(const RationalFunctionRow& x, const IntPoly& pivot) {
    if (pivot.is_zero()) throw DivisionByZeroPolynomial("transition pivot polynomial is identically zero");
    RationalFunctionRow out;
    out.reserve(x.size());
    for (const auto& e : x) out.push_back(e.divided_by(pivot));
    return out;
}

}  // namespace detail

/// Rows of the rational transition matrix T = M / D, as RationalFunctionRows
/// indexed by the output position.
inline std::vector<RationalFunctionRow> derive_rational_transition(const CurveModel& c, int i) {
    if (i < 1 || i > c.genus) throw std::out_of_range("row index outside [1, g]");
    const int d = c.degree;
    const int r = c.dim;
    auto f = [&](int k) -> const mpz_class& { return c.f(k); };
    std::map<int, RationalFunctionRow> win;

    for (int s = 0; s < r; ++s) {
        RationalFunctionRow unit = detail::zero_row(r);
        unit[s] = RationalFunction::constant(1);
        win[i - r + s] = std::move(unit);
    }

    // Rightward: offsets c = i, ..., 3i-1.
    for (int off = i; off <= 3 * i - 1; ++off) {
        RationalFunctionRow acc = detail::zero_row(r);
        IntPoly pivot;
        if (!c.zero_constant) {
            // k f_0 f_k = sum_{j=1}^{d} (nj - k + j) f_j f_{k-j},  k = 2in + off
            for (int j = 1; j <= d; ++j)
                detail::axpy(acc, IntPoly::linear(j - 2 * i, j - off) * f(j), win.at(off - j));
            pivot = IntPoly::linear(2 * i, off) * f(0);
        } else {
            // (n - k) f_1 f_k = -sum_{j=1}^{d-1} (n(j+1) - k + j) f_{j+1} f_{k-j}
            for (int j = 1; j <= d - 1; ++j)
                detail::axpy(acc, IntPoly::linear(j + 1 - 2 * i, j - off) * mpz_class(-f(j + 1)),
                             win.at(off - j));
            pivot = IntPoly::linear(1 - 2 * i, -off) * f(1);
        }
        win[off] = detail::divide_row(acc, pivot);
    }

    // Leftward: offsets c = i-r-1 down to 3i-d-r.
    // (nd - k) f_d f_k = -sum_{j=1}^{d} (n(d-j) - k - j) f_{d-j} f_{k+j}
    for (int off = i - r - 1; off >= 3 * i - d - r; --off) {
        RationalFunctionRow acc = detail::zero_row(r);
        for (int j = 1; j <= d; ++j) {
            if (f(d - j) == 0) continue;
            detail::axpy(acc, IntPoly::linear(d - j - 2 * i, -(off + j)) * mpz_class(-f(d - j)),
                         win.at(off + j));
        }
        win[off] = detail::divide_row(acc, IntPoly::linear(d - 2 * i, -off) * f(d));
    }

    // v_{n+1}[t] = f^{n+1}_{2in + 3i - r + t} = sum_j f_j f^n_{2in + 3i - r + t - j}
    std::vector<RationalFunctionRow> next(r, detail::zero_row(r));
    for (int t = 0; t < r; ++t) {
        const int big = 3 * i - r + t;
        for (int j = 0; j <= d; ++j)
            if (f(j) != 0) detail::axpy(next[t], IntPoly::constant(f(j)), win.at(big - j));
    }
    return next;
}

/// Integer form (M, D) of the transition for row i, normalized so that the
/// entries of M and D have no common integer content and D has a positive
/// leading coefficient.
inline TransitionSystem derive_transition(const CurveModel& c, int i, bool safe_mode = false) {
    const int r = c.dim;
    const auto next = derive_rational_transition(c, i);

    IntPoly den{1};
    for (const auto& col : next)
        for (const auto& e : col) {
            if (e.is_zero()) continue;
            IntPoly g = IntPoly::gcd(den, e.den());
            IntPoly q;
            IntPoly::divides(g, e.den(), &q);
            den = den * q;
        }

    TransitionSystem ts;
    ts.row = i;
    ts.dim = r;
    ts.M.resize(static_cast<std::size_t>(r) * r);
    for (int t = 0; t < r; ++t)
        for (int s = 0; s < r; ++s) {
            const auto& e = next[t][s];
            if (e.is_zero()) continue;
            IntPoly q;
            if (!IntPoly::divides(e.den(), den, &q))
                throw std::logic_error("derive_transition: denominator does not divide the lcm");
            ts.M[s * r + t] = e.num() * q;
        }

    mpz_class g = den.content();
    for (const auto& p : ts.M) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), p.content().get_mpz_t());
    if (den.lead() < 0) g = -g;
    ts.D = den.divexact(g);
    for (auto& p : ts.M)
        if (!p.is_zero()) p = p.divexact(g);
    ts.precision = precision_parameters(c, i, safe_mode);
    return ts;
}

struct EvaluatedTransition {
    IntMatrix M;
    mpz_class D;
};

inline EvaluatedTransition evaluate_matrix(const TransitionSystem& ts, const mpz_class& n) {
    EvaluatedTransition out{IntMatrix(ts.dim, ts.dim), ts.D(n)};
    if (out.D == 0) throw ZeroDenominatorAtIndex("D(n) vanishes at n = " + n.get_str());
    for (int s = 0; s < ts.dim; ++s)
        for (int t = 0; t < ts.dim; ++t) out.M(s, t) = ts.entry(s, t)(n);
    return out;
}

/// Text dump, one line per entry: `entry[i][j] = c_0 + c_1*n + ...`.
inline std::string dump_transition(const TransitionSystem& ts) {
    std::ostringstream os;
    os << "# row " << ts.row << ", r = " << ts.dim << ", e = " << ts.precision.e << ", w = " << ts.precision.w
       << '\n';
    for (int s = 0; s < ts.dim; ++s)
        for (int t = 0; t < ts.dim; ++t) os << "entry[" << s << "][" << t << "] = " << ts.entry(s, t) << '\n';
    os << "D = " << ts.D << '\n';
    return os.str();
}

}  // namespace hw
