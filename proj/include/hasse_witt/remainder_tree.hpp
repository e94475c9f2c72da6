#pragma once

// Accumulating remainder trees and the remainder forest.
//
// Given matrices A_0..A_{b-1}, moduli m_0..m_{b-1} and a row vector V, the
// tree computes C_j = V A_0 ... A_{j-1} mod m_j for every j in time
// quasi-linear in b. The forest runs the bottom layers as 2^k independent
// subtrees, carrying V^s = V A_0 ... A_{st-1} mod Y^s and Y^s = m_{st} ... m_{b-1}
// from one subtree to the next so that only one subtree is alive at a time.

#include "hasse_witt/fft_matmul.hpp"
#include "hasse_witt/instrumentation.hpp"
#include "hasse_witt/int_matrix.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hw {

namespace detail {

inline std::size_t limb_bytes(const mpz_class& x) { return mpz_size(x.get_mpz_t()) * sizeof(mp_limb_t); }

inline std::size_t limb_bytes(std::span<const mpz_class> xs) {
    std::size_t b = 0;
    for (const auto& x : xs) b += limb_bytes(x);
    return b;
}

inline std::size_t limb_bytes(std::span<const IntMatrix> ms) {
    std::size_t b = 0;
    for (const auto& m : ms) b += m.bytes();
    return b;
}

}  // namespace detail

/// Product tree of the moduli; level 0 is the root, level height() the leaves.
class ModulusTree {
public:
    explicit ModulusTree(std::vector<mpz_class> leaves) {
        const std::size_t t = leaves.size();
        if (t == 0 || !std::has_single_bit(t)) throw std::invalid_argument("ModulusTree: leaf count must be 2^h");
        const int h = std::countr_zero(t);
        levels_.resize(h + 1);
        levels_[h] = std::move(leaves);
        for (int i = h - 1; i >= 0; --i) {
            const auto& below = levels_[i + 1];
            auto& cur = levels_[i];
            cur.resize(below.size() / 2);
            for (std::size_t j = 0; j < cur.size(); ++j) cur[j] = below[2 * j] * below[2 * j + 1];
        }
        std::size_t bytes = 0;
        for (const auto& lvl : levels_) bytes += detail::limb_bytes(lvl);
        tracked_.reset(bytes);
    }

    int height() const { return static_cast<int>(levels_.size()) - 1; }
    std::size_t leaf_count() const { return levels_.back().size(); }
    const mpz_class& node(int level, std::size_t j) const { return levels_[level][j]; }
    const mpz_class& root() const { return levels_[0][0]; }
    std::span<const mpz_class> leaves() const { return levels_.back(); }

private:
    std::vector<std::vector<mpz_class>> levels_;
    TrackedBytes tracked_;
};

struct RemainderTreeOutput {
    std::vector<IntMatrix> residues;  // C_j as 1 x r row vectors
    IntMatrix product;                // A_0 ... A_{t-1}; empty when not requested
};

/// C_j = V A_0 ... A_{j-1} mod m_j for the t = 2^h leaves of `moduli`.
/// The product of all A_j is formed only when `want_product` is set.
inline RemainderTreeOutput remainder_tree(const IntMatrix& v, std::span<const IntMatrix> a, const ModulusTree& moduli,
                                          bool want_product = true) {
    const std::size_t t = moduli.leaf_count();
    if (a.size() != t) throw std::invalid_argument("remainder_tree: matrix count differs from modulus count");
    const int h = moduli.height();

    // Product tree, levels 1..h (level h aliases the input); the root only on request.
    std::vector<std::vector<IntMatrix>> prod(h + 1);
    TrackedBytes prod_bytes;
    std::size_t held = 0;
    auto level = [&](int i) -> std::span<const IntMatrix> {
        return i == h ? a : std::span<const IntMatrix>(prod[i]);
    };
    for (int i = h - 1; i >= 1; --i) {
        auto below = level(i + 1);
        prod[i].reserve(below.size() / 2);
        for (std::size_t j = 0; j < below.size() / 2; ++j) prod[i].push_back(multiply(below[2 * j], below[2 * j + 1]));
        held += detail::limb_bytes(std::span<const IntMatrix>(prod[i]));
        prod_bytes.reset(held);
    }

    RemainderTreeOutput out;
    if (want_product) {
        if (h == 0)
            out.product = a[0];
        else
            out.product = multiply(level(1)[0], level(1)[1]);
    }
    TrackedBytes product_bytes(out.product.bytes());

    std::vector<IntMatrix> cur{v};
    cur[0].reduce_mod(moduli.root());
    TrackedBytes cur_bytes(cur[0].bytes());
    for (int i = 1; i <= h; ++i) {
        auto mats = level(i);
        std::vector<IntMatrix> next(std::size_t{1} << i);
        for (std::size_t j = 0; j < next.size(); ++j) {
            const mpz_class& m = moduli.node(i, j);
            const IntMatrix& parent = cur[j / 2];
            if (m == 1 || parent.is_zero()) {
                next[j] = IntMatrix(parent.rows(), parent.cols());
                continue;
            }
            next[j] = (j & 1) ? multiply(parent, mats[j - 1]) : parent;
            next[j].reduce_mod(m);
        }
        cur = std::move(next);
        cur_bytes.reset(detail::limb_bytes(std::span<const IntMatrix>(cur)));
        if (i < h) {
            held -= detail::limb_bytes(std::span<const IntMatrix>(prod[i]));
            prod[i].clear();
            prod[i].shrink_to_fit();
            prod_bytes.reset(held);
        }
    }
    out.residues = std::move(cur);
    return out;
}

struct RemainderTreeResult {
    std::vector<IntMatrix> residues;
    IntMatrix product;
    mpz_class modulus_product;
};

/// Single remainder tree over explicit moduli; t must be a power of two.
inline RemainderTreeResult remainder_tree(const IntMatrix& v, std::span<const IntMatrix> a,
                                          std::span<const mpz_class> m) {
    ModulusTree tree(std::vector<mpz_class>(m.begin(), m.end()));
    auto r = remainder_tree(v, a, tree, true);
    return {std::move(r.residues), std::move(r.product), tree.root()};
}

struct ForestPlan {
    int levels = 0;  // l, with b = 2^l leaves
    int split = 0;   // k, with 2^k subtrees

    std::size_t leaf_count() const { return std::size_t{1} << levels; }
    std::size_t subtree_count() const { return std::size_t{1} << split; }
    std::size_t subtree_width() const { return std::size_t{1} << (levels - split); }

    /// Smallest power-of-two leaf count covering `leaves`, with k clamped to [0, l].
    static ForestPlan covering(std::size_t leaves, int k) {
        ForestPlan plan;
        plan.levels = std::countr_zero(std::bit_ceil(std::max<std::size_t>(leaves, 1)));
        plan.split = std::clamp(k, 0, plan.levels);
        return plan;
    }
};

/// clamp(round(2 log2(l sqrt(g))) + adjust, 0, l)
inline int default_k(int levels, int genus, int adjust = 0) {
    if (levels <= 0) return 0;
    const double raw = 2.0 * std::log2(levels * std::sqrt(static_cast<double>(std::max(genus, 1))));
    const int k = static_cast<int>(std::lround(raw)) + adjust;
    return std::clamp(k, 0, levels);
}

/// Leaves produced on demand. Indices at or beyond `size` are padding:
/// identity matrices with modulus 1.
class LeafStream {
public:
    using MatrixFn = std::function<IntMatrix(std::size_t)>;
    using ModulusFn = std::function<mpz_class(std::size_t)>;

    LeafStream(std::size_t size, std::size_t dim, MatrixFn matrix, ModulusFn modulus)
        : size_(size), dim_(dim), matrix_(std::move(matrix)), modulus_(std::move(modulus)) {}

    std::size_t size() const { return size_; }
    std::size_t dim() const { return dim_; }

    IntMatrix matrix(std::size_t j) const { return j < size_ ? matrix_(j) : IntMatrix::identity(dim_); }
    mpz_class modulus(std::size_t j) const { return j < size_ ? modulus_(j) : mpz_class(1); }

    std::vector<IntMatrix> matrices(std::size_t first, std::size_t count) const {
        std::vector<IntMatrix> out;
        out.reserve(count);
        for (std::size_t j = first; j < first + count; ++j) out.push_back(matrix(j));
        return out;
    }
    std::vector<mpz_class> moduli(std::size_t first, std::size_t count) const {
        std::vector<mpz_class> out;
        out.reserve(count);
        for (std::size_t j = first; j < first + count; ++j) out.push_back(modulus(j));
        return out;
    }

private:
    std::size_t size_;
    std::size_t dim_;
    MatrixFn matrix_;
    ModulusFn modulus_;
};

/// Product of many integers by a balanced pairing.
inline mpz_class balanced_product(std::vector<mpz_class> xs) {
    if (xs.empty()) return 1;
    while (xs.size() > 1) {
        std::vector<mpz_class> next((xs.size() + 1) / 2);
        for (std::size_t j = 0; j < next.size(); ++j)
            next[j] = 2 * j + 1 < xs.size() ? mpz_class(xs[2 * j] * xs[2 * j + 1]) : xs[2 * j];
        xs = std::move(next);
    }
    return xs[0];
}

/// Product of the moduli of every subtree, then of all subtrees.
inline mpz_class modulus_product(const LeafStream& leaves, const ForestPlan& plan) {
    std::vector<mpz_class> blocks;
    blocks.reserve(plan.subtree_count());
    const std::size_t t = plan.subtree_width();
    for (std::size_t s = 0; s < plan.subtree_count(); ++s) blocks.push_back(balanced_product(leaves.moduli(s * t, t)));
    return balanced_product(std::move(blocks));
}

/// Remainder forest; `emit(j, C_j)` is called in ascending j for every leaf
/// j < leaves.size(), subtree by subtree.
template <class Emit>
void remainder_forest(const IntMatrix& v, const LeafStream& leaves, const ForestPlan& plan, Emit&& emit) {
    if (leaves.size() > plan.leaf_count()) throw std::invalid_argument("remainder_forest: plan smaller than stream");
    const std::size_t t = plan.subtree_width();
    mpz_class y = modulus_product(leaves, plan);
    IntMatrix carried = v;
    carried.reduce_mod(y);
    TrackedBytes state_bytes(detail::limb_bytes(y) + carried.bytes());

    for (std::size_t s = 0; s < plan.subtree_count(); ++s) {
        const std::size_t first = s * t;
        if (first >= leaves.size()) break;
        const bool last = s + 1 == plan.subtree_count() || first + t >= leaves.size();
        std::vector<IntMatrix> mats = leaves.matrices(first, t);
        TrackedBytes input_bytes(detail::limb_bytes(std::span<const IntMatrix>(mats)));
        ModulusTree mt(leaves.moduli(first, t));
        auto out = remainder_tree(carried, mats, mt, !last);

        if (!last) {
            if (!mpz_divisible_p(y.get_mpz_t(), mt.root().get_mpz_t()))
                throw std::logic_error("remainder_forest: subtree modulus does not divide the carried product");
            mpz_divexact(y.get_mpz_t(), y.get_mpz_t(), mt.root().get_mpz_t());
            carried = multiply(carried, out.product);
            carried.reduce_mod(y);
            state_bytes.reset(detail::limb_bytes(y) + carried.bytes());
        }
        for (std::size_t j = 0; j < t && first + j < leaves.size(); ++j) emit(first + j, out.residues[j]);
    }
}

inline std::vector<IntMatrix> remainder_forest(const IntMatrix& v, const LeafStream& leaves, const ForestPlan& plan) {
    std::vector<IntMatrix> out;
    out.reserve(leaves.size());
    remainder_forest(v, leaves, plan, [&](std::size_t, const IntMatrix& c) { out.push_back(c); });
    return out;
}

}  // namespace hw
