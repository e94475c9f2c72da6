#pragma once

// Direct computations used for small primes and as oracles: the Hasse-Witt
// matrix from the coefficients of f^((p-1)/2) mod p, point counts, and the
// characteristic polynomial of a small matrix mod p.

#include "hasse_witt/curve.hpp"
#include "hasse_witt/fft_matmul.hpp"

#include <gmpxx.h>

#include <bit>
#include <cstdint>
#include <vector>

namespace hw {

/// g x g matrix over Z/p, row-major.
struct ModMatrix {
    std::uint64_t p = 0;
    int dim = 0;
    std::vector<std::uint64_t> entries;

    std::uint64_t operator()(int i, int j) const { return entries[i * dim + j]; }
    std::uint64_t& operator()(int i, int j) { return entries[i * dim + j]; }
    friend bool operator==(const ModMatrix&, const ModMatrix&) = default;
};

namespace detail {

using PolyModP = std::vector<std::uint64_t>;

/// a * b mod (p, x^limit). Kronecker substitution through GMP for large operands.
inline PolyModP mul_trunc(const PolyModP& a, const PolyModP& b, std::size_t limit, std::uint64_t p) {
    const std::size_t la = std::min(a.size(), limit), lb = std::min(b.size(), limit);
    if (la == 0 || lb == 0) return {};
    const std::size_t out_len = std::min(limit, la + lb - 1);
    PolyModP c(out_len, 0);
    if (std::min(la, lb) < 32) {
        for (std::size_t i = 0; i < la; ++i) {
            if (!a[i]) continue;
            for (std::size_t j = 0; j < lb && i + j < out_len; ++j)
                c[i + j] = static_cast<std::uint64_t>((c[i + j] + static_cast<u128>(a[i]) * b[j]) % p);
        }
        return c;
    }
    const unsigned slot = 2 * std::bit_width(p - 1) + std::bit_width(std::min(la, lb)) + 1;
    auto pack = [slot](const PolyModP& src, std::size_t len) {
        std::vector<std::uint64_t> bits((len * slot) / 64 + 2, 0);
        for (std::size_t k = 0; k < len; ++k) {
            const std::size_t pos = k * slot;
            const unsigned sh = pos % 64;
            bits[pos / 64] |= src[k] << sh;
            if (sh) bits[pos / 64 + 1] |= src[k] >> (64 - sh);
        }
        mpz_class z;
        mpz_import(z.get_mpz_t(), bits.size(), -1, sizeof(std::uint64_t), 0, 0, bits.data());
        return z;
    };
    const mpz_class prod = pack(a, la) * pack(b, lb);
    const std::size_t nlimbs = mpz_size(prod.get_mpz_t());
    const mp_limb_t* limbs = mpz_limbs_read(prod.get_mpz_t());
    for (std::size_t k = 0; k < out_len; ++k)
        c[k] = static_cast<std::uint64_t>(bit_window(limbs, nlimbs, k * slot, slot) % p);
    return c;
}

inline PolyModP reduce_coeffs(const CurveModel& c, std::uint64_t p) {
    PolyModP f(c.coeffs.size());
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = mpz_fdiv_ui(c.coeffs[k].get_mpz_t(), p);
    return f;
}

}  // namespace detail

/// f(x)^e mod (p, x^limit) by binary exponentiation.
inline std::vector<std::uint64_t> power_mod_p(const CurveModel& c, std::uint64_t e, std::uint64_t p, std::size_t limit) {
    const auto f = detail::reduce_coeffs(c, p);
    detail::PolyModP acc{1 % p};
    for (int bit = std::bit_width(e) - 1; bit >= 0; --bit) {
        acc = detail::mul_trunc(acc, acc, limit, p);
        if ((e >> bit) & 1) acc = detail::mul_trunc(acc, f, limit, p);
    }
    return acc;
}

/// w_ij = coefficient of x^(p i - j) in f^((p-1)/2), mod p, 1 <= i, j <= g.
inline ModMatrix naive_hassewitt(const CurveModel& c, std::uint64_t p) {
    const int g = c.genus;
    const auto h = power_mod_p(c, (p - 1) / 2, p, static_cast<std::size_t>(p) * g);
    ModMatrix w{p, g, std::vector<std::uint64_t>(g * g, 0)};
    for (int i = 1; i <= g; ++i)
        for (int j = 1; j <= g; ++j) {
            const std::size_t k = p * i - j;
            w(i - 1, j - 1) = k < h.size() ? h[k] : 0;
        }
    return w;
}

/// Number of points on the smooth projective model of y^2 = f(x) over F_p.
inline std::uint64_t point_count(const CurveModel& c, std::uint64_t p) {
    std::vector<signed char> chi(p, -1);
    chi[0] = 0;
    for (std::uint64_t x = 1; x < p; ++x) chi[(x * x) % p] = 1;
    const auto f = detail::reduce_coeffs(c, p);
    std::int64_t total = 0;
    for (std::uint64_t x = 0; x < p; ++x) {
        std::uint64_t v = 0;
        for (auto it = f.rbegin(); it != f.rend(); ++it) v = (v * x + *it) % p;
        total += 1 + chi[v];
    }
    total += (c.degree % 2 == 1) ? 1 : 1 + chi[f.back()];
    return static_cast<std::uint64_t>(total);
}

/// Coefficients (ascending, degree 2g) of lambda^g * det(lambda I - W) mod p,
/// which equals (-1)^g lambda^g det(W - lambda I).
inline std::vector<std::uint64_t> charpoly_mod_p(const ModMatrix& w) {
    const std::uint64_t p = w.p;
    const int g = w.dim;
    auto mulm = [p](std::uint64_t a, std::uint64_t b) { return static_cast<std::uint64_t>(static_cast<u128>(a) * b % p); };
    auto addm = [p](std::uint64_t a, std::uint64_t b) { return (a + b) % p; };
    auto subm = [p](std::uint64_t a, std::uint64_t b) { return (a + p - b) % p; };

    // Elementary symmetric functions of the eigenvalues: e1 = trace, e2 = sum
    // of principal 2x2 minors, e3 = det.
    std::uint64_t e1 = 0, e2 = 0, e3 = 0;
    for (int i = 0; i < g; ++i) e1 = addm(e1, w(i, i));
    for (int i = 0; i < g; ++i)
        for (int j = i + 1; j < g; ++j) e2 = addm(e2, subm(mulm(w(i, i), w(j, j)), mulm(w(i, j), w(j, i))));
    if (g == 3) {
        auto minor = [&](int r0, int r1, int c0, int c1) {
            return subm(mulm(w(r0, c0), w(r1, c1)), mulm(w(r0, c1), w(r1, c0)));
        };
        e3 = subm(addm(mulm(w(0, 0), minor(1, 2, 1, 2)), mulm(w(0, 2), minor(1, 2, 0, 1))),
                  mulm(w(0, 1), minor(1, 2, 0, 2)));
    }
    std::vector<std::uint64_t> out(2 * g + 1, 0);
    out[2 * g] = 1 % p;
    const std::uint64_t e[4] = {1, e1, e2, e3};
    for (int k = 1; k <= g; ++k) out[2 * g - k] = (k & 1) ? (e[k] ? p - e[k] : 0) : e[k];
    return out;
}

}  // namespace hw
