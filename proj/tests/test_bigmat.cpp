#include "hasse_witt/fft_matmul.hpp"
#include "hasse_witt/instrumentation.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hw;

namespace {

IntMatrix random_matrix(std::mt19937_64& rng, gmp_randclass& gr, std::size_t rows, std::size_t cols,
                        std::size_t bits) {
    IntMatrix m(rows, cols);
    for (auto& x : m.data()) x = oracle::random_signed(rng, gr, bits);
    return m;
}

/// Product written out entry by entry with mpz arithmetic.
IntMatrix reference_product(const IntMatrix& a, const IntMatrix& b) {
    IntMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            mpz_class s = 0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

mpz_class factorial(unsigned n) {
    mpz_class r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

}  // namespace

TEST(IntMatrix, TextbookProduct) {
    const IntMatrix a{{1, 2}, {3, 4}}, b{{5, 6}, {7, 8}};
    EXPECT_EQ(mat_mul_classical(a, b), (IntMatrix{{19, 22}, {43, 50}}));
    EXPECT_EQ(multiply(a, b), (IntMatrix{{19, 22}, {43, 50}}));
    EXPECT_EQ(mat_mul_classical(a, IntMatrix::identity(2)), a);
}

TEST(IntMatrix, FactorialChain) {
    // diag(1, n) multiplied for n = 1..14 gives diag(1, 14!).
    IntMatrix acc = IntMatrix::identity(2);
    for (long n = 1; n <= 14; ++n) acc = multiply(acc, IntMatrix{{1, 0}, {0, n}});
    EXPECT_EQ(acc(1, 1), factorial(14));
    EXPECT_EQ(acc(1, 1), mpz_class("87178291200"));
}

TEST(IntMatrix, DimensionMismatch) {
    const IntMatrix a(2, 3), b(2, 2);
    EXPECT_THROW(mat_mul_classical(a, b), DimensionMismatch);
    EXPECT_THROW(mat_mul_fft(default_ntt_context(), a, b), DimensionMismatch);
    EXPECT_THROW(multiply(a, b), DimensionMismatch);
    EXPECT_THROW(IntMatrix(2, 2, std::vector<mpz_class>(3)), DimensionMismatch);
}

TEST(IntMatrix, ReduceMod) {
    IntMatrix m{{-7, 7}, {15, 0}};
    m.reduce_mod(5);
    EXPECT_EQ(m, (IntMatrix{{3, 2}, {0, 0}}));
    m = IntMatrix{{-7, 7}};
    m.reduce_mod(1);
    EXPECT_TRUE(m.is_zero());
}

TEST(Ntt, RoundTripAndCyclicConvolution) {
    const NttContext& ctx = default_ntt_context();
    std::mt19937_64 rng(9);
    for (std::size_t q = 0; q < NttContext::kPrimeCount; ++q) {
        const MontgomeryPrime& mp = ctx.prime(q);
        const u64 p = mp.modulus();
        for (int lg : {1, 3, 8, 12}) {
            const std::size_t n = std::size_t{1} << lg;
            const auto tw = ctx.twiddles(q, lg, false), itw = ctx.twiddles(q, lg, true);
            std::vector<u64> a(n), b(n);
            for (auto& x : a) x = rng() % p;
            for (auto& x : b) x = rng() % p;

            // forward then inverse is multiplication by n
            std::vector<u64> t = a;
            ctx.forward(q, t, tw);
            ctx.inverse(q, t, itw);
            for (std::size_t k = 0; k < n; ++k)
                ASSERT_EQ(t[k], static_cast<u64>((static_cast<u128>(a[k]) * n) % p)) << "q=" << q << " lg=" << lg;

            if (lg > 8) continue;
            std::vector<u64> fa = a, fb = b;
            ctx.forward(q, fa, tw);
            ctx.forward(q, fb, tw);
            // mul(x, to_mont(y)) = x y mod p
            for (std::size_t k = 0; k < n; ++k) fa[k] = mp.mul(fa[k], mp.to_mont(fb[k]));
            ctx.inverse(q, fa, itw);
            const u64 ninv = mp.inverse(n % p);
            for (std::size_t k = 0; k < n; ++k) {
                u128 s = 0;
                for (std::size_t j = 0; j < n; ++j)
                    s = (s + static_cast<u128>(a[j]) * b[(k + n - j) % n]) % p;
                ASSERT_EQ(mp.mul(fa[k], mp.to_mont(ninv)), static_cast<u64>(s)) << "q=" << q << " k=" << k;
            }
        }
    }
}

TEST(Crt, ReconstructsBalancedRange) {
    const NttContext& ctx = default_ntt_context();
    const auto& tables = detail::crt_tables(ctx);
    mpz_class P = 1;
    for (u64 p : NttContext::kPrimes) P *= mpz_class(std::to_string(p));
    const mpz_class half = P / 2;
    EXPECT_EQ(tables.modulus.to_mpz(), P);

    auto residues = [&](const mpz_class& x) {
        std::array<u64, 4> r{};
        for (std::size_t q = 0; q < 4; ++q) {
            mpz_class m;
            mpz_fdiv_r(m.get_mpz_t(), x.get_mpz_t(), mpz_class(std::to_string(NttContext::kPrimes[q])).get_mpz_t());
            r[q] = std::stoull(m.get_str());
        }
        return r;
    };
    gmp_randclass gr(gmp_randinit_default);
    gr.seed(21);
    for (int trial = 0; trial < 500; ++trial) {
        mpz_class x = gr.get_z_range(P) - half;  // [-half, half]
        EXPECT_EQ(tables.reconstruct(residues(x), ctx).to_mpz(), x);
    }
    EXPECT_EQ(tables.reconstruct(residues(half), ctx).to_mpz(), half);
    EXPECT_EQ(tables.reconstruct(residues(-half), ctx).to_mpz(), -half);
    EXPECT_EQ(tables.reconstruct(residues(half + 1), ctx).to_mpz(), -half);
    EXPECT_EQ(tables.reconstruct(residues(0), ctx).to_mpz(), 0);
}

TEST(FftProduct, MatchesClassicalOnRandomMatrices) {
    std::mt19937_64 rng(13);
    gmp_randclass gr(gmp_randinit_default);
    gr.seed(13);
    const NttContext& ctx = default_ntt_context();
    for (int trial = 0; trial < 100; ++trial) {
        const IntMatrix a = random_matrix(rng, gr, 6, 6, 10000), b = random_matrix(rng, gr, 6, 6, 10000);
        ASSERT_EQ(mat_mul_fft(ctx, a, b), reference_product(a, b)) << "trial " << trial;
    }
}

TEST(FftProduct, MixedSizesAndShapes) {
    std::mt19937_64 rng(14);
    gmp_randclass gr(gmp_randinit_default);
    gr.seed(14);
    const NttContext& ctx = default_ntt_context();
    for (std::size_t bits : {1u, 63u, 64u, 65u, 127u, 1000u}) {
        const IntMatrix a = random_matrix(rng, gr, 3, 5, bits), b = random_matrix(rng, gr, 5, 2, 7 * bits + 3);
        EXPECT_EQ(mat_mul_fft(ctx, a, b), reference_product(a, b)) << bits;
    }
    // Entries at the extremes of the digit range.
    IntMatrix ones(4, 4), negs(4, 4);
    mpz_class big;
    mpz_ui_pow_ui(big.get_mpz_t(), 2, 5000);
    for (auto& x : ones.data()) x = big - 1;
    for (auto& x : negs.data()) x = -(big - 1);
    EXPECT_EQ(mat_mul_fft(ctx, ones, negs), reference_product(ones, negs));
    EXPECT_EQ(mat_mul_fft(ctx, ones, IntMatrix(4, 4)), IntMatrix(4, 4));
}

TEST(FftProduct, IdentityOnHugeEntries) {
    std::mt19937_64 rng(15);
    gmp_randclass gr(gmp_randinit_default);
    gr.seed(15);
    const IntMatrix a = random_matrix(rng, gr, 3, 3, 100000);
    EXPECT_EQ(mat_mul_fft(default_ntt_context(), a, IntMatrix::identity(3)), a);
}

TEST(FftProduct, SignFlip) {
    std::mt19937_64 rng(16);
    gmp_randclass gr(gmp_randinit_default);
    gr.seed(16);
    const NttContext& ctx = default_ntt_context();
    const IntMatrix a = random_matrix(rng, gr, 4, 4, 3000), b = random_matrix(rng, gr, 4, 4, 3000);
    IntMatrix na = a;
    for (auto& x : na.data()) x = -x;
    IntMatrix expect = mat_mul_fft(ctx, a, b);
    for (auto& x : expect.data()) x = -x;
    EXPECT_EQ(mat_mul_fft(ctx, na, b), expect);
}

TEST(FftProduct, TransformCounts) {
    std::mt19937_64 rng(17);
    gmp_randclass gr(gmp_randinit_default);
    gr.seed(17);
    for (std::size_t r : {2u, 5u, 7u}) {
        const IntMatrix a = random_matrix(rng, gr, r, r, 4000), b = random_matrix(rng, gr, r, r, 4000);
        counters().reset();
        mat_mul_fft(default_ntt_context(), a, b);
        EXPECT_EQ(counters().forward_transforms.load(), 2 * r * r);
        EXPECT_EQ(counters().inverse_transforms.load(), r * r);
        EXPECT_EQ(counters().fft_products.load(), 1u);
    }
}

TEST(ChunkWidth, SatisfiesBoundAndIsMaximal) {
    mpz_class P = 1;
    for (u64 p : NttContext::kPrimes) P *= mpz_class(std::to_string(p));
    auto admissible = [&](std::size_t bits, std::size_t r, unsigned c) {
        const std::size_t chunks = (bits + 1 + c - 1) / c;
        mpz_class bound = mpz_class(std::to_string(chunks)) * mpz_class(std::to_string(2 * r));
        mpz_class pow;
        mpz_ui_pow_ui(pow.get_mpz_t(), 2, 2 * c);
        return bound * pow < P;
    };
    for (std::size_t bits : {std::size_t{1} << 10, std::size_t{1} << 20, std::size_t{1} << 30})
        for (std::size_t r : {2u, 8u}) {
            const unsigned c = choose_chunk_width(bits, r);
            EXPECT_LE(c, kMaxChunkBits);
            EXPECT_TRUE(admissible(bits, r, c)) << bits << " " << r;
            if (c < kMaxChunkBits) {
                EXPECT_FALSE(admissible(bits, r, c + 1)) << bits << " " << r;
            }
        }
    unsigned prev = kMaxChunkBits;
    for (std::size_t bits = 1; bits <= (std::size_t{1} << 34); bits *= 4) {
        const unsigned c = choose_chunk_width(bits, 8);
        EXPECT_LE(c, prev);
        prev = c;
    }
    EXPECT_EQ(choose_chunk_width(100, 2), kMaxChunkBits);
}

TEST(VecMatMul, SmallExamples) {
    const IntMatrix a{{1, 2}, {3, 4}};
    EXPECT_EQ(vec_mat_mul({mpz_class(1), mpz_class(1)}, a), (std::vector<mpz_class>{4, 6}));
    EXPECT_EQ(vec_mat_mul_classical({mpz_class(2), mpz_class(-1)}, a), (std::vector<mpz_class>{-1, 0}));
    EXPECT_EQ(vec_mat_mul_fft(default_ntt_context(), {mpz_class(2), mpz_class(-1)}, a),
              (std::vector<mpz_class>{-1, 0}));
}

TEST(VecMatMul, BlockedMatchesClassical) {
    std::mt19937_64 rng(18);
    gmp_randclass gr(gmp_randinit_default);
    gr.seed(18);
    const NttContext& ctx = default_ntt_context();
    const std::vector<std::pair<std::size_t, std::size_t>> sizes = {
        {100, 50}, {5000, 300}, {200000, 15000}, {70000, 70000}, {64, 100000}};
    for (std::size_t r : {2u, 4u, 7u})
        for (auto [vb, ab] : sizes) {
            const IntMatrix v = random_matrix(rng, gr, 1, r, vb), a = random_matrix(rng, gr, r, r, ab);
            ASSERT_EQ(vec_mat_mul_blocked(ctx, v, a), reference_product(v, a)) << r << " " << vb << " " << ab;
        }
    EXPECT_THROW(vec_mat_mul_blocked(ctx, IntMatrix(2, 2), IntMatrix(2, 2)), DimensionMismatch);
}

TEST(Dispatch, ChoosesPathBySize) {
    std::mt19937_64 rng(19);
    gmp_randclass gr(gmp_randinit_default);
    gr.seed(19);
    const IntMatrix small = random_matrix(rng, gr, 4, 4, 1000);
    const IntMatrix large = random_matrix(rng, gr, 4, 4, std::size_t{1} << 18);
    const IntMatrix vec_long = random_matrix(rng, gr, 1, 4, std::size_t{1} << 20);
    EXPECT_EQ(choose_product_path(small, small), ProductPath::Classical);
    EXPECT_EQ(choose_product_path(large, large), ProductPath::Fft);
    EXPECT_EQ(choose_product_path(small, large), ProductPath::Classical);  // lopsided
    const IntMatrix vec_short = random_matrix(rng, gr, 1, 4, std::size_t{1} << 16);
    EXPECT_EQ(choose_product_path(vec_short, large), ProductPath::Classical);
    EXPECT_EQ(choose_product_path(vec_long, small), ProductPath::Classical);
    const IntMatrix mid = random_matrix(rng, gr, 4, 4, std::size_t{1} << 15);
    EXPECT_EQ(choose_product_path(vec_long, mid), ProductPath::Blocked);

    FftDispatch never;
    never.min_bits = ~std::size_t{0};
    never.blocked_min_work = ~std::size_t{0};
    EXPECT_EQ(choose_product_path(large, large, never), ProductPath::Classical);
    EXPECT_EQ(multiply(large, large, never), multiply(large, large));
    EXPECT_EQ(multiply(vec_long, mid), multiply(vec_long, mid, never));
}
