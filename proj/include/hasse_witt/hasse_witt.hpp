#pragma once

// Hasse-Witt matrices W_p for all admissible p <= N.
//
// Row i of W_p is read from the window v_n, n = (p-1)/2, of the
// coefficients of f^n. The windows obey v_{n+1} = v_n M(n) / D(n), so
//   v_n = V M(0) ... M(n-1) / (D(0) ... D(n-1)).
// A remainder forest evaluates the partial products modulo p^e for every
// admissible p at once, with the moduli shifted w places to the left so the
// last w transitions of each prime are applied exactly (where the factors
// of p in the denominators live). Primes below a cutoff, and any prime whose
// valuations exceed the available precision, are computed directly.

#include "hasse_witt/curve.hpp"
#include "hasse_witt/fft_matmul.hpp"
#include "hasse_witt/instrumentation.hpp"
#include "hasse_witt/int_matrix.hpp"
#include "hasse_witt/naive.hpp"
#include "hasse_witt/remainder_tree.hpp"
#include "hasse_witt/transition.hpp"

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hw {

class PrecisionFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RecordSource { Forest, Naive };

inline const char* to_string(RecordSource s) { return s == RecordSource::Forest ? "forest" : "naive"; }

struct HasseWittRecord {
    std::uint64_t p = 0;
    ModMatrix matrix;
    std::uint64_t trace = 0;
    std::vector<std::uint64_t> charpoly;    // ascending, degree 2g
    std::optional<std::int64_t> frobenius_trace;  // a_p, genus 1 only
    RecordSource source = RecordSource::Forest;
};

/// V = e_{r-i+1}: the window position holding f^0_0 = 1.
inline IntMatrix initial_vector(const CurveModel& c, int i) {
    IntMatrix v(1, c.dim);
    v(0, c.dim - i) = 1;
    return v;
}

namespace detail {

inline unsigned valuation(const mpz_class& x, std::uint64_t p) {
    if (x == 0) return ~0u;
    mpz_class q = x;
    unsigned v = 0;
    while (mpz_divisible_ui_p(q.get_mpz_t(), p)) {
        mpz_divexact_ui(q.get_mpz_t(), q.get_mpz_t(), p);
        ++v;
    }
    return v;
}

inline mpz_class pow_ui(std::uint64_t p, unsigned e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), p, e);
    return r;
}

}  // namespace detail

/// Last g entries of v_n mod p (window order), where v_n = v_j T / u with
///   C = V M_0 ... M_{j-1} mod p^e,  c = D_0 ... D_{j-1} mod p^e,
///   T = M_j ... M_{j+w-1},           u = D_j ... D_{j+w-1}  (exact).
/// The denominator valuation is read off the residue c; the tail's factors
/// of p are cancelled against the last g columns of T before reducing.
inline std::vector<std::uint64_t> assemble_row(const IntMatrix& residue, const mpz_class& scalar_residue,
                                               const IntMatrix& tail, const mpz_class& tail_den, std::uint64_t p,
                                               unsigned e, int g) {
    const mpz_class pe = detail::pow_ui(p, e);
    mpz_class c = scalar_residue % pe;
    if (c < 0) c += pe;
    if (c == 0) throw PrecisionFailure("denominator product vanishes modulo p^e");
    const unsigned v_pre = detail::valuation(c, p);
    const mpz_class pv = detail::pow_ui(p, v_pre);
    const unsigned prec = e - v_pre;
    const mpz_class q = detail::pow_ui(p, prec);

    // v_j mod p^prec
    mpz_class inv;
    mpz_class unit = (c / pv) % q;
    if (!mpz_invert(inv.get_mpz_t(), unit.get_mpz_t(), q.get_mpz_t()))
        throw PrecisionFailure("denominator unit is not invertible");
    const std::size_t r = residue.cols();
    std::vector<mpz_class> vj(r);
    for (std::size_t s = 0; s < r; ++s) {
        if (!mpz_divisible_p(residue(0, s).get_mpz_t(), pv.get_mpz_t()))
            throw PrecisionFailure("numerator residue not divisible by the denominator valuation");
        vj[s] = (residue(0, s) / pv) * inv % q;
        if (vj[s] < 0) vj[s] += q;
    }

    // Cancel common factors of p between u and the last g columns of T.
    const unsigned v_tail = detail::valuation(tail_den, p);
    unsigned v_cols = ~0u;
    for (std::size_t s = 0; s < r; ++s)
        for (int t = static_cast<int>(r) - g; t < static_cast<int>(r); ++t)
            v_cols = std::min(v_cols, detail::valuation(tail(s, t), p));
    const unsigned cancel = std::min(v_tail, v_cols);
    const unsigned left = v_tail - cancel;
    if (left >= prec) throw PrecisionFailure("tail denominator valuation exceeds the available precision");
    const mpz_class pc = detail::pow_ui(p, cancel), pl = detail::pow_ui(p, left);

    mpz_class den_unit = tail_den / pc / pl;
    den_unit %= p;
    if (den_unit < 0) den_unit += p;
    mpz_class den_inv;
    if (!mpz_invert(den_inv.get_mpz_t(), den_unit.get_mpz_t(), mpz_class(p).get_mpz_t()))
        throw PrecisionFailure("tail denominator unit is not invertible");

    std::vector<std::uint64_t> out(g);
    for (int t = static_cast<int>(r) - g; t < static_cast<int>(r); ++t) {
        mpz_class y = 0;
        for (std::size_t s = 0; s < r; ++s) y += vj[s] * (tail(s, t) / pc);
        y %= q;
        if (y < 0) y += q;
        if (!mpz_divisible_p(y.get_mpz_t(), pl.get_mpz_t()))
            throw PrecisionFailure("tail numerator not divisible by the remaining denominator valuation");
        mpz_class val = (y / pl) * den_inv % p;
        if (val < 0) val += p;
        out[t - (r - g)] = val.get_ui();
    }
    return out;
}

/// One row index i of W_p for every prime in a sorted list, computed with a
/// remainder forest that is advanced one subtree at a time.
class RowForest {
public:
    struct Outcome {
        std::uint64_t p;
        std::optional<std::vector<std::uint64_t>> row;  // W_p[i][0..g-1]; empty on PrecisionFailure
        std::string failure;
    };

    RowForest(const CurveModel& curve, TransitionSystem ts, std::span<const std::uint64_t> primes, ForestPlan plan)
        : curve_(curve), ts_(std::move(ts)), plan_(plan) {
        const auto w = static_cast<std::uint64_t>(ts_.precision.w);
        leaves_ = primes.empty() ? 0 : (primes.back() - 1) / 2 - w + 1;
        if (leaves_ > plan_.leaf_count()) throw std::invalid_argument("RowForest: plan smaller than prime range");
        active_.assign(leaves_, 0);
        for (std::uint64_t p : primes) {
            if ((p - 1) / 2 < w) throw std::invalid_argument("RowForest: prime below 2w + 1");
            active_[(p - 1) / 2 - w] = 1;
        }
        std::vector<mpz_class> blocks;
        for (std::size_t s = 0; s < plan_.subtree_count(); ++s) {
            std::vector<mpz_class> ms;
            for (std::size_t j = s * plan_.subtree_width(); j < (s + 1) * plan_.subtree_width(); ++j)
                ms.push_back(modulus(j));
            blocks.push_back(balanced_product(std::move(ms)));
        }
        y_ = balanced_product(std::move(blocks));
        vec_ = initial_vector(curve_, ts_.row);
        vec_.reduce_mod(y_);
        scalar_ = IntMatrix::scalar(1);
        scalar_.reduce_mod(y_);
        state_bytes_.reset(detail::limb_bytes(y_) + vec_.bytes() + scalar_.bytes());
    }

    static std::size_t leaves_for(std::span<const std::uint64_t> primes, int w) {
        return primes.empty() ? 0 : (primes.back() - 1) / 2 - static_cast<std::uint64_t>(w) + 1;
    }

    bool done() const { return next_ * plan_.subtree_width() >= leaves_; }
    int row() const { return ts_.row; }

    /// Process the next subtree; outcomes are in ascending p.
    std::vector<Outcome> advance() {
        std::vector<Outcome> out;
        if (done()) return out;
        const std::size_t t = plan_.subtree_width();
        const std::size_t first = next_ * t;
        const int w = ts_.precision.w;
        const unsigned e = static_cast<unsigned>(ts_.precision.e);
        const bool last = first + t >= leaves_;
        ++next_;

        // Transitions for the block plus the w-step tails of its active leaves.
        const std::size_t span_end = std::min(first + t, leaves_) + static_cast<std::size_t>(w);
        std::vector<EvaluatedTransition> evals;
        evals.reserve(span_end - first);
        for (std::size_t j = first; j < span_end; ++j) evals.push_back(evaluate_matrix(ts_, j));

        std::vector<IntMatrix> mats, dens;
        std::vector<mpz_class> mods;
        mats.reserve(t);
        dens.reserve(t);
        mods.reserve(t);
        for (std::size_t j = first; j < first + t; ++j) {
            if (j < leaves_) {
                mats.push_back(evals[j - first].M);
                dens.push_back(IntMatrix::scalar(evals[j - first].D));
            } else {
                mats.push_back(IntMatrix::identity(ts_.dim));
                dens.push_back(IntMatrix::scalar(1));
            }
            mods.push_back(modulus(j));
        }
        TrackedBytes input_bytes(detail::limb_bytes(std::span<const IntMatrix>(mats)) +
                                 detail::limb_bytes(std::span<const IntMatrix>(dens)));

        ModulusTree tree(std::move(mods));
        auto num = remainder_tree(vec_, mats, tree, !last);
        auto den = remainder_tree(scalar_, dens, tree, !last);
        if (!last) {
            if (!mpz_divisible_p(y_.get_mpz_t(), tree.root().get_mpz_t()))
                throw std::logic_error("RowForest: subtree modulus does not divide the carried product");
            mpz_divexact(y_.get_mpz_t(), y_.get_mpz_t(), tree.root().get_mpz_t());
            vec_ = multiply(vec_, num.product);
            vec_.reduce_mod(y_);
            scalar_ = mat_mul_classical(scalar_, den.product);
            scalar_.reduce_mod(y_);
            state_bytes_.reset(detail::limb_bytes(y_) + vec_.bytes() + scalar_.bytes());
        }

        const int g = curve_.genus;
        for (std::size_t j = first; j < std::min(first + t, leaves_); ++j) {
            if (!active_[j]) continue;
            const std::uint64_t p = 2 * j + 1 + 2 * static_cast<std::uint64_t>(w);
            IntMatrix tail = IntMatrix::identity(ts_.dim);
            mpz_class tail_den = 1;
            for (int s = 0; s < w; ++s) {
                tail = mat_mul_classical(tail, evals[j - first + s].M);
                tail_den *= evals[j - first + s].D;
            }
            Outcome o{p, std::nullopt, {}};
            try {
                auto window = assemble_row(num.residues[j - first], den.residues[j - first](0, 0), tail, tail_den, p,
                                           e, g);
                std::vector<std::uint64_t> row(g);
                for (int col = 0; col < g; ++col) row[col] = window[g - 1 - col];
                o.row = std::move(row);
            } catch (const PrecisionFailure& err) {
                o.failure = err.what();
            }
            out.push_back(std::move(o));
        }
        return out;
    }

private:
    mpz_class modulus(std::size_t j) const {
        if (j >= leaves_ || !active_[j]) return 1;
        const std::uint64_t p = 2 * j + 1 + 2 * static_cast<std::uint64_t>(ts_.precision.w);
        return detail::pow_ui(p, static_cast<unsigned>(ts_.precision.e));
    }

    const CurveModel& curve_;
    TransitionSystem ts_;
    ForestPlan plan_;
    std::size_t leaves_ = 0;
    std::vector<char> active_;
    std::size_t next_ = 0;
    mpz_class y_;
    IntMatrix vec_;
    IntMatrix scalar_;
    TrackedBytes state_bytes_;
};

/// All rows of W_p for the primes in `primes` (sorted, each >= 2w + 1).
inline std::vector<RowForest::Outcome> compute_hassewitt_rows(const CurveModel& curve, const TransitionSystem& ts,
                                                              std::span<const std::uint64_t> primes,
                                                              const ForestPlan& plan) {
    std::vector<RowForest::Outcome> out;
    if (primes.empty()) return out;
    RowForest job(curve, ts, primes, plan);
    while (!job.done()) {
        auto part = job.advance();
        for (auto& o : part) out.push_back(std::move(o));
    }
    return out;
}

struct HasseWittOptions {
    std::uint64_t naive_cutoff = 64;
    std::optional<int> k;  // subtree split; default_k when unset
    int k_adjust = 0;
    bool safe_mode = false;
    bool force_naive = false;
    unsigned threads = 1;
};

struct HasseWittRun {
    AdmissiblePrimeSet primes;
    ForestPlan plan;
    PrecisionParameters precision;
    std::vector<std::uint64_t> precision_failures;  // forest primes rerouted to the direct method
    std::size_t naive_count = 0;
    std::size_t forest_count = 0;
};

/// a_p from the trace of W_p (p > 16) or by counting points (small p), genus 1 only.
inline std::int64_t frobenius_trace_genus1(const CurveModel& c, std::uint64_t p, std::uint64_t trace) {
    if (p > 16) {
        const auto t = static_cast<std::int64_t>(trace);
        return t > static_cast<std::int64_t>(p / 2) ? t - static_cast<std::int64_t>(p) : t;
    }
    return static_cast<std::int64_t>(p + 1) - static_cast<std::int64_t>(point_count(c, p));
}

inline HasseWittRecord make_record(const CurveModel& c, ModMatrix w, RecordSource source) {
    HasseWittRecord rec;
    rec.p = w.p;
    std::uint64_t tr = 0;
    for (int i = 0; i < w.dim; ++i) tr = (tr + w(i, i)) % w.p;
    rec.trace = tr;
    rec.charpoly = charpoly_mod_p(w);
    rec.matrix = std::move(w);
    rec.source = source;
    if (c.genus == 1) rec.frobenius_trace = frobenius_trace_genus1(c, rec.p, tr);
    return rec;
}

/// Every admissible p <= bound, in ascending order, delivered through `emit`
/// as soon as the subtree holding p has been processed. `batch_done` runs
/// after the directly computed primes and after every subtree.
inline HasseWittRun compute_hassewitt_matrices(const CurveModel& c, std::uint64_t bound, const HasseWittOptions& opt,
                                               const std::function<void(const HasseWittRecord&)>& emit,
                                               const std::function<void()>& batch_done = {}) {
    HasseWittRun run;
    run.primes = admissible_primes(c, bound);
    const int g = c.genus;
    std::vector<TransitionSystem> systems;
    for (int i = 1; i <= g; ++i) systems.push_back(derive_transition(c, i, opt.safe_mode));
    // Row jobs advance in lockstep, so they share the largest tail length.
    run.precision = systems.front().precision;
    for (const auto& ts : systems) run.precision.w = std::max(run.precision.w, ts.precision.w);
    for (auto& ts : systems) ts.precision = run.precision;
    const auto w = static_cast<std::uint64_t>(run.precision.w);

    std::vector<std::uint64_t> forest_primes;
    for (std::uint64_t p : run.primes.primes) {
        if (opt.force_naive || p < opt.naive_cutoff || p < 2 * w + 3) {
            emit(make_record(c, naive_hassewitt(c, p), RecordSource::Naive));
            ++run.naive_count;
        } else {
            forest_primes.push_back(p);
        }
    }
    if (batch_done) batch_done();
    if (forest_primes.empty()) return run;

    const std::size_t leaves = RowForest::leaves_for(forest_primes, run.precision.w);
    ForestPlan plan = ForestPlan::covering(leaves, 0);
    plan = ForestPlan::covering(leaves, opt.k ? *opt.k : default_k(plan.levels, g, opt.k_adjust));
    run.plan = plan;

    std::vector<RowForest> jobs;
    jobs.reserve(g);
    for (auto& ts : systems) jobs.emplace_back(c, ts, forest_primes, plan);

    while (!jobs.front().done()) {
        std::vector<std::vector<RowForest::Outcome>> parts(g);
        if (opt.threads > 1 && g > 1) {
            std::vector<std::future<std::vector<RowForest::Outcome>>> futures;
            for (auto& job : jobs) futures.push_back(std::async(std::launch::async, [&job] { return job.advance(); }));
            for (int i = 0; i < g; ++i) parts[i] = futures[i].get();
        } else {
            for (int i = 0; i < g; ++i) parts[i] = jobs[i].advance();
        }
        for (std::size_t k = 0; k < parts[0].size(); ++k) {
            const std::uint64_t p = parts[0][k].p;
            ModMatrix wp{p, g, std::vector<std::uint64_t>(g * g)};
            bool ok = true;
            for (int i = 0; i < g; ++i) {
                const auto& o = parts[i][k];
                if (o.p != p) throw std::logic_error("row jobs out of step");
                if (!o.row) {
                    ok = false;
                    break;
                }
                for (int j = 0; j < g; ++j) wp(i, j) = (*o.row)[j];
            }
            if (ok) {
                emit(make_record(c, std::move(wp), RecordSource::Forest));
                ++run.forest_count;
            } else {
                run.precision_failures.push_back(p);
                emit(make_record(c, naive_hassewitt(c, p), RecordSource::Naive));
                ++run.naive_count;
            }
        }
        if (batch_done) batch_done();
    }
    return run;
}

inline std::vector<HasseWittRecord> compute_hassewitt_matrices(const CurveModel& c, std::uint64_t bound,
                                                               const HasseWittOptions& opt = {},
                                                               HasseWittRun* run_out = nullptr) {
    std::vector<HasseWittRecord> out;
    auto run = compute_hassewitt_matrices(c, bound, opt, [&](const HasseWittRecord& r) { out.push_back(r); });
    if (run_out) *run_out = std::move(run);
    return out;
}

}  // namespace hw
