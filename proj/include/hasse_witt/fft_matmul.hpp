#pragma once

// Small-primes FFT multiplication of integer matrices.
//
// Every entry u is written as u = F(2^c) with balanced digits in
// [-2^(c-1), 2^(c-1)). The product of an (a x m) by an (m x b) matrix of
// such polynomials is formed in the transform domain over each of the four
// NTT primes: a*m + m*b forward transforms, pointwise m-term inner products,
// and a*b inverse transforms. Coefficients are recovered by CRT as signed
// values in (-P/2, P/2], P = p1 p2 p3 p4, and evaluated at 2^c with a
// signed carry sweep.

#include "hasse_witt/instrumentation.hpp"
#include "hasse_witt/int_matrix.hpp"
#include "hasse_witt/ntt.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace hw {

inline constexpr unsigned kMaxChunkBits = 120;
inline constexpr std::size_t kFftThresholdBits = std::size_t{1} << 15;

/// When the transform path beats GMP, from microbenchmarks on r x r
/// products (r = 3, 5, 7). Row vectors and lopsided operands stay classical.
struct FftDispatch {
    std::size_t min_bits = kFftThresholdBits;             // smaller operand's largest entry
    std::size_t min_work = std::size_t{1} << 22;         // min_bits * inner^2
    std::size_t max_ratio = 4;                            // larger / smaller entry size
    std::size_t blocked_min_work = std::size_t{3} << 17;  // row vector times matrix: matrix bits * inner^2
};

namespace detail {

inline const mpz_class& prime_product() {
    static const mpz_class P = [] {
        mpz_class acc = 1;
        for (u64 p : NttContext::kPrimes) {
            mpz_class x;
            mpz_import(x.get_mpz_t(), 1, -1, sizeof(u64), 0, 0, &p);
            acc *= x;
        }
        return acc;
    }();
    return P;
}

inline std::size_t chunk_count(std::size_t bits, unsigned c) { return (bits + 1 + c - 1) / c; }

}  // namespace detail

/// Largest c <= kMaxChunkBits with chunks(c) * 2^(2c) * r * 2 < p1 p2 p3 p4,
/// where chunks(c) = ceil((entry_bits + 1) / c).
inline unsigned choose_chunk_width(std::size_t entry_bits, std::size_t r) {
    const mpz_class& P = detail::prime_product();
    for (unsigned c = kMaxChunkBits; c >= 1; --c) {
        mpz_class bound = mpz_class(detail::chunk_count(std::max<std::size_t>(entry_bits, 1), c));
        bound *= 2 * r;
        mpz_mul_2exp(bound.get_mpz_t(), bound.get_mpz_t(), 2 * c);
        if (bound < P) return c;
    }
    throw ContextTooSmall("choose_chunk_width: no admissible chunk width");
}

namespace detail {

/// c-bit window of |x| starting at bit `pos` (c <= 120).
inline u128 bit_window(const mp_limb_t* limbs, std::size_t nlimbs, std::size_t pos, unsigned c) {
    u128 out = 0;
    std::size_t limb = pos / 64;
    unsigned shift = pos % 64;
    unsigned got = 0;
    while (got < c && limb < nlimbs) {
        const u128 part = static_cast<u128>(limbs[limb] >> shift);
        out |= part << got;
        got += 64 - shift;
        shift = 0;
        ++limb;
    }
    if (c < 128) out &= (static_cast<u128>(1) << c) - 1;
    return out;
}

/// Balanced base-2^c digits of x, exactly `len` of them.
inline void split_balanced(const mpz_class& x, unsigned c, std::size_t len, i128* out) {
    const std::size_t n = mpz_size(x.get_mpz_t());
    const mp_limb_t* limbs = mpz_limbs_read(x.get_mpz_t());
    const i128 half = static_cast<i128>(1) << (c - 1);
    const i128 full = static_cast<i128>(1) << c;
    i128 carry = 0;
    for (std::size_t k = 0; k < len; ++k) {
        i128 dgt = static_cast<i128>(bit_window(limbs, n, k * c, c)) + carry;
        if (dgt >= half) {
            dgt -= full;
            carry = 1;
        } else {
            carry = 0;
        }
        out[k] = dgt;
    }
    if (x < 0)
        for (std::size_t k = 0; k < len; ++k) out[k] = -out[k];
}

/// Fixed-width two's-complement integer for the CRT/carry sweep.
struct Wide {
    static constexpr int kLimbs = 5;
    std::array<u64, kLimbs> w{};

    bool negative() const { return w[kLimbs - 1] >> 63; }

    void add(const Wide& o) {
        u128 carry = 0;
        for (int i = 0; i < kLimbs; ++i) {
            const u128 s = static_cast<u128>(w[i]) + o.w[i] + carry;
            w[i] = static_cast<u64>(s);
            carry = s >> 64;
        }
    }
    void sub(const Wide& o) {
        u64 borrow = 0;
        for (int i = 0; i < kLimbs; ++i) {
            const u128 d = static_cast<u128>(w[i]) - o.w[i] - borrow;
            w[i] = static_cast<u64>(d);
            borrow = static_cast<u64>(d >> 64) & 1;
        }
    }
    /// this += x * m, x < 2^64, nonnegative operands.
    void add_mul(const Wide& x, u64 m) {
        u128 carry = 0;
        for (int i = 0; i < kLimbs; ++i) {
            const u128 s = static_cast<u128>(x.w[i]) * m + w[i] + carry;
            w[i] = static_cast<u64>(s);
            carry = s >> 64;
        }
    }
    bool greater(const Wide& o) const {
        for (int i = kLimbs - 1; i >= 0; --i)
            if (w[i] != o.w[i]) return w[i] > o.w[i];
        return false;
    }
    u128 low_bits(unsigned c) const {
        u128 v = static_cast<u128>(w[0]) | (static_cast<u128>(w[1]) << 64);
        return c < 128 ? v & ((static_cast<u128>(1) << c) - 1) : v;
    }
    void shift_right_arith(unsigned c) {
        const u64 fill = negative() ? ~u64{0} : 0;
        while (c >= 64) {
            for (int i = 0; i < kLimbs - 1; ++i) w[i] = w[i + 1];
            w[kLimbs - 1] = fill;
            c -= 64;
        }
        if (c == 0) return;
        for (int i = 0; i < kLimbs - 1; ++i) w[i] = (w[i] >> c) | (w[i + 1] << (64 - c));
        w[kLimbs - 1] = static_cast<u64>(static_cast<std::int64_t>(w[kLimbs - 1]) >> c);
    }
    mpz_class to_mpz() const {
        Wide mag = *this;
        const bool neg = negative();
        if (neg) {
            Wide zero;
            zero.sub(mag);
            mag = zero;
        }
        mpz_class out;
        mpz_import(out.get_mpz_t(), kLimbs, -1, sizeof(u64), 0, 0, mag.w.data());
        return neg ? mpz_class(-out) : out;
    }
    static Wide from_u64(u64 x) {
        Wide r;
        r.w[0] = x;
        return r;
    }
};

/// Garner reconstruction constants for the four primes.
struct CrtTables {
    std::array<Wide, 4> partial{};  // 1, p1, p1p2, p1p2p3
    Wide modulus{};                 // P
    Wide half{};                    // floor(P / 2)
    // inverse of partial[q] mod p_q, Montgomery form; partial[q] mod p_s, Montgomery form.
    std::array<u64, 4> inv_partial{};
    std::array<std::array<u64, 4>, 4> partial_mod{};
    // p_a^-1 mod p_b for a < b, Montgomery form.
    std::array<std::array<u64, 4>, 4> inv_prime{};

    explicit CrtTables(const NttContext& ctx) {
        partial[0] = Wide::from_u64(1);
        for (int q = 1; q < 4; ++q) {
            partial[q] = Wide{};
            partial[q].add_mul(partial[q - 1], ctx.prime(q - 1).modulus());
        }
        modulus.add_mul(partial[3], ctx.prime(3).modulus());
        half = modulus;
        half.shift_right_arith(1);
        for (int q = 0; q < 4; ++q) {
            const MontgomeryPrime& mp = ctx.prime(q);
            for (int s = 0; s < 4; ++s) {
                // partial[s] mod p_q by Horner over the limbs.
                u64 acc = 0;
                const u64 two64 = mp.pow(2, 64);
                for (int i = Wide::kLimbs - 1; i >= 0; --i)
                    acc = mp.add(mp.mul(mp.to_mont(acc), two64), partial[s].w[i] % mp.modulus());
                partial_mod[q][s] = mp.to_mont(acc);
            }
            inv_partial[q] = mp.to_mont(mp.inverse(mp.from_mont(partial_mod[q][q])));
            for (int a = 0; a < q; ++a) inv_prime[a][q] = mp.to_mont(mp.inverse(ctx.prime(a).modulus() % mp.modulus()));
        }
    }

    /// Mixed-radix digits: the value in [0, P) is sum_q y[q] * partial[q].
    std::array<u64, 4> garner(const std::array<u64, 4>& res, const NttContext& ctx) const {
        std::array<u64, 4> y{};
        for (int q = 0; q < 4; ++q) {
            const MontgomeryPrime& mp = ctx.prime(q);
            // x_{<q} mod p_q
            u64 acc = 0;
            for (int s = 0; s < q; ++s) acc = mp.add(acc, mp.mul(y[s], partial_mod[q][s]));
            y[q] = mp.mul(mp.sub(res[q], acc), inv_partial[q]);
        }
        return y;
    }

    /// Signed value in (-P/2, P/2] congruent to the residues.
    Wide reconstruct(const std::array<u64, 4>& res, const NttContext& ctx) const {
        const auto y = garner(res, ctx);
        Wide x;
        for (int q = 0; q < 4; ++q) x.add_mul(partial[q], y[q]);
        if (x.greater(half)) x.sub(modulus);
        return x;
    }

    /// The value in [0, P) as four limbs; true when it exceeds P/2, i.e. the signed value is x - P.
    /// Garner digits y_q against p_0 .. p_{q-1}, then Horner: y0 + p0 (y1 + p1 (y2 + p2 y3)).
    bool reconstruct_unsigned(const std::array<u64, 4>& res, const NttContext& ctx, std::array<u64, 4>& x) const {
        const MontgomeryPrime &m1 = ctx.prime(1), &m2 = ctx.prime(2), &m3 = ctx.prime(3);
        const u64 p1 = m1.modulus(), p2 = m2.modulus(), p3 = m3.modulus();
        // The primes decrease, so a residue mod p_a < 2 p_b for b > a.
        auto fold = [](u64 v, u64 p) { return v >= p ? v - p : v; };
        const u64 y0 = res[0];
        const u64 y1 = m1.mul(m1.sub(res[1], fold(y0, p1)), inv_prime[0][1]);
        u64 t2 = m2.mul(m2.sub(res[2], fold(y0, p2)), inv_prime[0][2]);
        const u64 y2 = m2.mul(m2.sub(t2, fold(y1, p2)), inv_prime[1][2]);
        u64 t3 = m3.mul(m3.sub(res[3], fold(y0, p3)), inv_prime[0][3]);
        t3 = m3.mul(m3.sub(t3, fold(y1, p3)), inv_prime[1][3]);
        const u64 y3 = m3.mul(m3.sub(t3, fold(y2, p3)), inv_prime[2][3]);

        const u64 p0 = ctx.prime(0).modulus();
        u128 t = static_cast<u128>(y3) * p2 + y2;
        u64 a0 = static_cast<u64>(t), a1 = static_cast<u64>(t >> 64);
        t = static_cast<u128>(a0) * p1 + y1;
        const u64 b0 = static_cast<u64>(t);
        t = static_cast<u128>(a1) * p1 + (t >> 64);
        const u64 b1 = static_cast<u64>(t), b2 = static_cast<u64>(t >> 64);
        t = static_cast<u128>(b0) * p0 + y0;
        x[0] = static_cast<u64>(t);
        t = static_cast<u128>(b1) * p0 + (t >> 64);
        x[1] = static_cast<u64>(t);
        t = static_cast<u128>(b2) * p0 + (t >> 64);
        x[2] = static_cast<u64>(t);
        x[3] = static_cast<u64>(t >> 64);
        for (int i = 3; i >= 0; --i)
            if (x[i] != half.w[i]) return x[i] > half.w[i];
        return false;
    }
};

inline const CrtTables& crt_tables(const NttContext& ctx) {
    static const CrtTables t(ctx);
    return t;
}

/// Evaluate sum_k coeff[k] * 2^(c k) given the residues of every coefficient.
/// Coefficients are added as values in [0, P); those standing for x - P are
/// corrected at the end by subtracting P times a sparse bit pattern.
inline mpz_class evaluate_at_power_of_two(const std::array<const u64*, 4>& residues, std::size_t len, unsigned c,
                                          const NttContext& ctx) {
    const CrtTables& crt = crt_tables(ctx);
    const std::size_t limbs = (len * c) / 64 + 6;
    std::vector<u64> sum(limbs, 0), wrap(limbs, 0);
    bool wrapped = false;
    std::array<u64, 4> x{};
    for (std::size_t k = 0; k < len; ++k) {
        if (crt.reconstruct_unsigned({residues[0][k], residues[1][k], residues[2][k], residues[3][k]}, ctx, x)) {
            wrap[k * c / 64] |= u64{1} << (k * c % 64);
            wrapped = true;
        }
        const std::size_t limb = k * c / 64;
        const unsigned sh = k * c % 64;
        const std::array<u64, 5> shifted = {
            x[0] << sh,
            sh ? (x[1] << sh) | (x[0] >> (64 - sh)) : x[1],
            sh ? (x[2] << sh) | (x[1] >> (64 - sh)) : x[2],
            sh ? (x[3] << sh) | (x[2] >> (64 - sh)) : x[3],
            sh ? x[3] >> (64 - sh) : 0,
        };
        u64 carry = 0;
        std::size_t i = 0;
        for (; i < 5; ++i) {
            const u128 t = static_cast<u128>(sum[limb + i]) + shifted[i] + carry;
            sum[limb + i] = static_cast<u64>(t);
            carry = static_cast<u64>(t >> 64);
        }
        for (std::size_t j = limb + i; carry; ++j) carry = ++sum[j] == 0;
    }
    mpz_class out;
    mpz_import(out.get_mpz_t(), sum.size(), -1, sizeof(u64), 0, 0, sum.data());
    if (wrapped) {
        mpz_class w;
        mpz_import(w.get_mpz_t(), wrap.size(), -1, sizeof(u64), 0, 0, wrap.data());
        out -= w * prime_product();
    }
    return out;
}

/// R^2 / n in Montgomery form: multiplying a transform by it undoes the later
/// pointwise 1/R and the unscaled inverse transform.
inline u64 transform_scale(const MontgomeryPrime& mp, std::size_t n) {
    const u64 r_ordinary = static_cast<u64>((static_cast<u128>(1) << 64) % mp.modulus());
    return mp.to_mont(mp.mul(mp.to_mont(r_ordinary), mp.inverse(n % mp.modulus())));
}

/// sum_s x_s[t] * y_s[t] / R mod p for each t, reducing once per eight terms.
inline void pointwise_sum(const MontgomeryPrime& mp, std::span<const u64* const> x, std::span<const u64* const> y,
                          std::size_t n, u64* out) {
    std::fill(out, out + n, 0);
    for (std::size_t s0 = 0; s0 < x.size(); s0 += 8) {
        const std::size_t s1 = std::min(x.size(), s0 + 8);
        for (std::size_t t = 0; t < n; ++t) {
            u128 acc = 0;
            for (std::size_t s = s0; s < s1; ++s) acc += static_cast<u128>(x[s][t]) * y[s][t];
            out[t] = mp.add(out[t], mp.redc(acc));
        }
    }
}

}  // namespace detail

/// Exact product A * B via the small-primes transform; identical to mat_mul_classical.
inline IntMatrix mat_mul_fft(const NttContext& ctx, const IntMatrix& a, const IntMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("mat_mul_fft: inner dimensions differ");
    const std::size_t rows = a.rows(), inner = a.cols(), cols = b.cols();
    const std::size_t bits_a = a.max_bits(), bits_b = b.max_bits();
    if (bits_a == 0 || bits_b == 0 || inner == 0) return IntMatrix(rows, cols);

    const unsigned c = choose_chunk_width(std::max(bits_a, bits_b), inner);
    const std::size_t len_a = detail::chunk_count(bits_a, c), len_b = detail::chunk_count(bits_b, c);
    const std::size_t out_len = len_a + len_b - 1;
    const int log_n = std::bit_width(out_len - 1 == 0 ? std::size_t{1} : out_len - 1);
    if (log_n > ctx.max_log()) throw ContextTooSmall("mat_mul_fft: transform length exceeds 2^a");
    const std::size_t n = std::size_t{1} << log_n;

    std::vector<i128> digits_a(rows * inner * len_a), digits_b(inner * cols * len_b);
    for (std::size_t e = 0; e < rows * inner; ++e)
        detail::split_balanced(a.data()[e], c, len_a, digits_a.data() + e * len_a);
    for (std::size_t e = 0; e < inner * cols; ++e)
        detail::split_balanced(b.data()[e], c, len_b, digits_b.data() + e * len_b);

    std::array<std::vector<u64>, NttContext::kPrimeCount> result;
    std::vector<u64> fa(rows * inner * n), fb(inner * cols * n), acc(n);
    for (std::size_t q = 0; q < NttContext::kPrimeCount; ++q) {
        const MontgomeryPrime& mp = ctx.prime(q);
        const auto tw = ctx.twiddles(q, log_n, false);
        const auto itw = ctx.twiddles(q, log_n, true);
        auto load = [&](const std::vector<i128>& digits, std::size_t count, std::size_t len, std::vector<u64>& dst) {
            for (std::size_t e = 0; e < count; ++e) {
                u64* row = dst.data() + e * n;
                const i128* src = digits.data() + e * len;
                for (std::size_t k = 0; k < len; ++k) row[k] = mp.reduce(src[k]);
                std::fill(row + len, row + n, 0);
                ctx.forward(q, std::span<u64>(row, n), tw);
            }
        };
        load(digits_a, rows * inner, len_a, fa);
        load(digits_b, inner * cols, len_b, fb);

        // Scaling B by R^2 / n undoes both the pointwise 1/R and the transform scaling.
        const u64 scale = detail::transform_scale(mp, n);
        for (u64& x : fb) x = mp.mul(x, scale);

        result[q].resize(rows * cols * out_len);
        std::vector<const u64*> xs(inner), ys(inner);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                for (std::size_t k = 0; k < inner; ++k) {
                    xs[k] = fa.data() + (i * inner + k) * n;
                    ys[k] = fb.data() + (k * cols + j) * n;
                }
                detail::pointwise_sum(mp, xs, ys, n, acc.data());
                ctx.inverse(q, acc, itw);
                std::copy_n(acc.begin(), out_len, result[q].begin() + (i * cols + j) * out_len);
            }
    }

    counters().forward_transforms += rows * inner + inner * cols;
    counters().inverse_transforms += rows * cols;
    counters().fft_products += 1;

    IntMatrix out(rows, cols);
    for (std::size_t e = 0; e < rows * cols; ++e) {
        std::array<const u64*, 4> res{};
        for (std::size_t q = 0; q < 4; ++q) res[q] = result[q].data() + e * out_len;
        out.data()[e] = detail::evaluate_at_power_of_two(res, out_len, c, ctx);
    }
    return out;
}

/// Row vector times matrix through the same transform path.
inline std::vector<mpz_class> vec_mat_mul_fft(const NttContext& ctx, const std::vector<mpz_class>& v,
                                              const IntMatrix& a) {
    return mat_mul_fft(ctx, IntMatrix::row_vector(v), a).data();
}

inline std::vector<mpz_class> vec_mat_mul_classical(const std::vector<mpz_class>& v, const IntMatrix& a) {
    return mat_mul_classical(IntMatrix::row_vector(v), a).data();
}

/// Row vector times matrix when the vector entries are much longer than the
/// matrix entries. The vector is cut into blocks no longer than the matrix
/// entries; the matrix is transformed once, each block once, and the block
/// products are overlap-added before the CRT.
inline IntMatrix vec_mat_mul_blocked(const NttContext& ctx, const IntMatrix& v, const IntMatrix& a) {
    if (v.rows() != 1 || v.cols() != a.rows()) throw DimensionMismatch("vec_mat_mul_blocked: shapes differ");
    const std::size_t inner = a.rows(), cols = a.cols();
    const std::size_t bits_v = v.max_bits(), bits_a = a.max_bits();
    if (bits_v == 0 || bits_a == 0 || inner == 0) return IntMatrix(1, cols);

    // Overlapping blocks can stack two partial sums on one coefficient.
    const unsigned c = choose_chunk_width(std::max(bits_a, std::size_t{64}), 2 * inner);
    const std::size_t len_a = detail::chunk_count(bits_a, c), len_v = detail::chunk_count(bits_v, c);
    // Longer transforms waste less of each block on the overlap but cost more
    // for the matrix; take the cheapest length by a rough operation count.
    const int min_log = std::bit_width(2 * len_a - 1);
    if (min_log > ctx.max_log()) throw ContextTooSmall("vec_mat_mul_blocked: transform length exceeds 2^a");
    auto blocks_for = [&](int lg) {
        const std::size_t blk = (std::size_t{1} << lg) - len_a + 1;
        return (len_v + blk - 1) / blk;
    };
    auto cost = [&](int lg) {
        const double len = std::ldexp(1.0, lg), nb = static_cast<double>(blocks_for(lg));
        return len * lg * (static_cast<double>(inner * cols) + static_cast<double>(inner + cols) * nb) +
               len * static_cast<double>(inner * cols) * nb;
    };
    int log_n = min_log;
    for (int lg = min_log + 1; lg <= std::min(min_log + 4, ctx.max_log()); ++lg)
        if (cost(lg) < cost(log_n)) log_n = lg;
    const std::size_t n = std::size_t{1} << log_n;
    const std::size_t block = n - len_a + 1;
    const std::size_t blocks = blocks_for(log_n);
    const std::size_t out_len = blocks * block + len_a - 1;

    std::vector<i128> digits_v(inner * blocks * block, 0), digits_a(inner * cols * len_a);
    for (std::size_t s = 0; s < inner; ++s) detail::split_balanced(v(0, s), c, len_v, digits_v.data() + s * blocks * block);
    for (std::size_t e = 0; e < inner * cols; ++e)
        detail::split_balanced(a.data()[e], c, len_a, digits_a.data() + e * len_a);

    std::array<std::vector<u64>, NttContext::kPrimeCount> result;
    std::vector<u64> fa(inner * cols * n), fv(inner * n), acc(n);
    for (std::size_t q = 0; q < NttContext::kPrimeCount; ++q) {
        const MontgomeryPrime& mp = ctx.prime(q);
        const auto tw = ctx.twiddles(q, log_n, false);
        const auto itw = ctx.twiddles(q, log_n, true);
        auto load = [&](const i128* src, std::size_t len, u64* row) {
            for (std::size_t k = 0; k < len; ++k) row[k] = mp.reduce(src[k]);
            std::fill(row + len, row + n, 0);
            ctx.forward(q, std::span<u64>(row, n), tw);
        };
        for (std::size_t e = 0; e < inner * cols; ++e) load(digits_a.data() + e * len_a, len_a, fa.data() + e * n);
        const u64 scale = detail::transform_scale(mp, n);
        for (u64& x : fa) x = mp.mul(x, scale);

        result[q].assign(cols * out_len, 0);
        std::vector<const u64*> xs(inner), ys(inner);
        for (std::size_t s = 0; s < inner; ++s) xs[s] = fv.data() + s * n;
        for (std::size_t b = 0; b < blocks; ++b) {
            for (std::size_t s = 0; s < inner; ++s)
                load(digits_v.data() + s * blocks * block + b * block, block, fv.data() + s * n);
            for (std::size_t j = 0; j < cols; ++j) {
                for (std::size_t s = 0; s < inner; ++s) ys[s] = fa.data() + (s * cols + j) * n;
                detail::pointwise_sum(mp, xs, ys, n, acc.data());
                ctx.inverse(q, acc, itw);
                u64* dst = result[q].data() + j * out_len + b * block;
                const std::size_t span = std::min(n, out_len - b * block);
                for (std::size_t t = 0; t < span; ++t) dst[t] = mp.add(dst[t], acc[t]);
            }
        }
    }

    counters().forward_transforms += inner * cols + inner * blocks;
    counters().inverse_transforms += cols * blocks;
    counters().fft_products += 1;

    IntMatrix out(1, cols);
    for (std::size_t j = 0; j < cols; ++j) {
        std::array<const u64*, 4> res{};
        for (std::size_t q = 0; q < 4; ++q) res[q] = result[q].data() + j * out_len;
        out(0, j) = detail::evaluate_at_power_of_two(res, out_len, c, ctx);
    }
    return out;
}

enum class ProductPath { Classical, Fft, Blocked };

/// Which algorithm `multiply` uses for a * b.
inline ProductPath choose_product_path(const IntMatrix& a, const IntMatrix& b, const FftDispatch& policy = {}) {
    const std::size_t inner = a.cols();
    if (inner < 2) return ProductPath::Classical;
    const std::size_t ba = a.max_bits(), bb = b.max_bits();
    if (a.rows() == 1)
        return bb * inner * inner >= policy.blocked_min_work && ba >= 4 * bb ? ProductPath::Blocked
                                                                           : ProductPath::Classical;
    const std::size_t lo = std::min(ba, bb), hi = std::max(ba, bb);
    if (lo >= policy.min_bits && lo * inner * inner >= policy.min_work && hi <= lo * policy.max_ratio)
        return ProductPath::Fft;
    return ProductPath::Classical;
}

/// Product with automatic classical/transform dispatch.
inline IntMatrix multiply(const IntMatrix& a, const IntMatrix& b, const FftDispatch& policy = {}) {
    switch (choose_product_path(a, b, policy)) {
        case ProductPath::Fft:
            return mat_mul_fft(default_ntt_context(), a, b);
        case ProductPath::Blocked:
            return vec_mat_mul_blocked(default_ntt_context(), a, b);
        default:
            return mat_mul_classical(a, b);
    }
}

inline std::vector<mpz_class> vec_mat_mul(const std::vector<mpz_class>& v, const IntMatrix& a,
                                          const FftDispatch& policy = {}) {
    return multiply(IntMatrix::row_vector(v), a, policy).data();
}

}  // namespace hw
