#pragma once

// Number-theoretic transforms over four 62-bit primes p = c * 2^40 + 1.
//
// Residues are kept in ordinary form; twiddle factors and constants are kept
// in Montgomery form (R = 2^64), so mul(x, w_mont) = x * w mod p. The
// forward transform is decimation-in-frequency (natural order in,
// bit-reversed order out) and the inverse is decimation-in-time (bit-reversed
// in, natural out), so no bit-reversal permutation is ever applied.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace hw {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
using i128 = __int128;

class MontgomeryPrime {
public:
    constexpr MontgomeryPrime() = default;
    explicit constexpr MontgomeryPrime(u64 p) : p_(p) {
        // Newton iteration for p^-1 mod 2^64.
        u64 inv = p;
        for (int i = 0; i < 6; ++i) inv *= 2 - p * inv;
        neg_inv_ = ~inv + 1;
        const u128 r = (static_cast<u128>(1) << 64) % p;
        r1_ = static_cast<u64>(r);
        r2_ = static_cast<u64>((r * r) % p);
    }

    constexpr u64 modulus() const { return p_; }

    constexpr u64 mul(u64 a, u64 b) const {
        const u128 t = static_cast<u128>(a) * b;
        const u64 m = static_cast<u64>(t) * neg_inv_;
        u64 u = static_cast<u64>((t + static_cast<u128>(m) * p_) >> 64);
        return u >= p_ ? u - p_ : u;
    }
    /// a * b / R in [0, 2p), valid for a < 4p and b < p.
    constexpr u64 mul_lazy(u64 a, u64 b) const {
        const u128 t = static_cast<u128>(a) * b;
        const u64 m = static_cast<u64>(t) * neg_inv_;
        return static_cast<u64>((t + static_cast<u128>(m) * p_) >> 64);
    }
    /// t / R mod p in [0, p), valid for t < 2^127 (a sum of up to eight products of residues).
    constexpr u64 redc(u128 t) const {
        const u64 m = static_cast<u64>(t) * neg_inv_;
        u64 u = static_cast<u64>((t + static_cast<u128>(m) * p_) >> 64);
        if (u >= p_) u -= p_;
        return u >= p_ ? u - p_ : u;
    }
    constexpr u64 add(u64 a, u64 b) const {
        u64 s = a + b;
        return s >= p_ ? s - p_ : s;
    }
    constexpr u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + p_ - b; }
    constexpr u64 neg(u64 a) const { return a ? p_ - a : 0; }

    constexpr u64 to_mont(u64 a) const { return mul(a % p_, r2_); }
    constexpr u64 from_mont(u64 a) const { return mul(a, 1); }

    /// x mod p for |x| < 2^127.
    constexpr u64 reduce(i128 x) const {
        const bool negative = x < 0;
        const u128 mag = negative ? static_cast<u128>(-x) : static_cast<u128>(x);
        u64 hi = static_cast<u64>(mag >> 64);
        u64 lo = static_cast<u64>(mag);
        // p > 2^61, so a few subtractions replace the divisions.
        while (hi >= p_) hi -= p_;
        while (lo >= p_) lo -= p_;
        // hi * 2^64 = mul(hi, R^2)
        const u64 r = add(mul(hi, r2_), lo);
        return negative ? neg(r) : r;
    }

    /// a^e in ordinary form.
    constexpr u64 pow(u64 a, u64 e) const {
        u64 base = to_mont(a), acc = r1_;
        while (e) {
            if (e & 1) acc = mul(acc, base);
            base = mul(base, base);
            e >>= 1;
        }
        return from_mont(acc);
    }
    constexpr u64 inverse(u64 a) const { return pow(a, p_ - 2); }

private:
    u64 p_ = 0;
    u64 neg_inv_ = 0;
    u64 r1_ = 0;
    u64 r2_ = 0;
};

class ContextTooSmall : public std::length_error {
public:
    using std::length_error::length_error;
};

class NttContext {
public:
    static constexpr std::size_t kPrimeCount = 4;
    static constexpr int kMaxLog = 40;
    static constexpr std::array<u64, kPrimeCount> kPrimes = {
        0x3fffc00000000001ULL,  // 2^46 | p - 1
        0x3fffbe0000000001ULL,  // 2^41 | p - 1
        0x3fff840000000001ULL,  // 2^42 | p - 1
        0x3fff810000000001ULL,  // 2^40 | p - 1
    };
    static constexpr std::array<u64, kPrimeCount> kGenerators = {11, 3, 19, 5};

    NttContext() {
        for (std::size_t q = 0; q < kPrimeCount; ++q) {
            const MontgomeryPrime& mp = primes_[q] = MontgomeryPrime(kPrimes[q]);
            const u64 p = kPrimes[q];
            const u64 omega = mp.pow(kGenerators[q], (p - 1) >> kMaxLog);
            // roots_[q][j] is a primitive 2^j-th root of unity.
            roots_[q][kMaxLog] = omega;
            for (int j = kMaxLog; j > 0; --j) roots_[q][j - 1] = mp.mul(mp.to_mont(roots_[q][j]), roots_[q][j]);
        }
    }

    const MontgomeryPrime& prime(std::size_t q) const { return primes_[q]; }
    u64 root(std::size_t q, int log_len) const { return roots_[q][log_len]; }
    int max_log() const { return kMaxLog; }

    /// Twiddle table for length 2^log_len, Montgomery form. The block
    /// [len, 2 len) holds the powers w^k, k < len, of a primitive (2 len)-th
    /// root w (inverse roots when requested).
    std::vector<u64> twiddles(std::size_t q, int log_len, bool inverse) const {
        const MontgomeryPrime& mp = primes_[q];
        const std::size_t n = std::size_t{1} << log_len;
        std::vector<u64> t(std::max<std::size_t>(n, 2));
        for (int j = 1; j <= log_len; ++j) {
            const std::size_t len = std::size_t{1} << (j - 1);
            u64 w = roots_[q][j];
            if (inverse) w = mp.inverse(w);
            const u64 wm = mp.to_mont(w);
            u64 cur = mp.to_mont(1);
            for (std::size_t k = 0; k < len; ++k) {
                t[len + k] = cur;
                cur = mp.mul(cur, wm);
            }
        }
        return t;
    }

    /// In-place forward transform; length must be a power of two and tw from twiddles(q, log, false).
    /// Butterflies keep values in [0, 2p); the result is normalized to [0, p).
    void forward(std::size_t q, std::span<u64> a, std::span<const u64> tw) const {
        const MontgomeryPrime& mp = primes_[q];
        const u64 p2 = 2 * mp.modulus();
        const std::size_t n = a.size();
        for (std::size_t len = n >> 1; len >= 1; len >>= 1) {
            const u64* w = tw.data() + len;
            for (std::size_t s = 0; s < n; s += 2 * len) {
                u64* x = a.data() + s;
                u64* y = x + len;
                for (std::size_t k = 0; k < len; ++k) {
                    const u64 u = x[k], v = y[k];
                    const u64 t = u + v;
                    x[k] = t >= p2 ? t - p2 : t;
                    y[k] = mp.mul_lazy(u + p2 - v, w[k]);
                }
            }
        }
        normalize(mp, a);
    }

    /// In-place inverse transform without the 1/n scaling; tw from twiddles(q, log, true).
    void inverse(std::size_t q, std::span<u64> a, std::span<const u64> tw) const {
        const MontgomeryPrime& mp = primes_[q];
        const u64 p2 = 2 * mp.modulus();
        const std::size_t n = a.size();
        for (std::size_t len = 1; len < n; len <<= 1) {
            const u64* w = tw.data() + len;
            for (std::size_t s = 0; s < n; s += 2 * len) {
                u64* x = a.data() + s;
                u64* y = x + len;
                for (std::size_t k = 0; k < len; ++k) {
                    const u64 u = x[k], v = mp.mul_lazy(y[k], w[k]);
                    const u64 t = u + v, d = u + p2 - v;
                    x[k] = t >= p2 ? t - p2 : t;
                    y[k] = d >= p2 ? d - p2 : d;
                }
            }
        }
        normalize(mp, a);
    }

private:
    static void normalize(const MontgomeryPrime& mp, std::span<u64> a) {
        const u64 p = mp.modulus();
        for (u64& x : a)
            if (x >= p) x -= p;
    }

    std::array<MontgomeryPrime, kPrimeCount> primes_{};
    std::array<std::array<u64, kMaxLog + 1>, kPrimeCount> roots_{};
};

inline const NttContext& default_ntt_context() {
    static const NttContext ctx;
    return ctx;
}

}  // namespace hw
