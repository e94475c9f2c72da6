#pragma once

// Command-line front end: record formatting and the four run modes. Option
// parsing lives in tools/hasse_witt_cli.cpp; everything here writes to a
// caller-supplied stream so it can be driven from tests.

#include "hasse_witt/hasse_witt.hpp"

#include <gmpxx.h>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace hw::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kMathFailure = 2, kIoFailure = 3 };

enum class Mode { Compute, Verify, Bench, Selftest };
enum class Format { Csv, Jsonl };

struct RunConfig {
    std::vector<mpz_class> coeffs;  // f_0 .. f_d
    std::uint64_t bound = 0;
    std::optional<int> k;
    int k_adjust = 0;
    Mode mode = Mode::Compute;
    Format format = Format::Csv;
    std::string output_path;  // empty: the stream passed to run()
    std::uint64_t naive_cutoff = 64;
    bool safe_mode = false;
    double verify_fraction = 1.0;
    std::uint64_t seed = 1;
    bool header = false;
    bool dump_transition = false;
    unsigned threads = 1;
};

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// "19,17,13" -> [19, 17, 13]; whitespace around entries is ignored.
inline std::vector<mpz_class> parse_coefficients(const std::string& text) {
    std::vector<mpz_class> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        const auto last = item.find_last_not_of(" \t");
        if (first == std::string::npos) throw UsageError("empty coefficient in '" + text + "'");
        item = item.substr(first, last - first + 1);
        if (item.front() == '+') item.erase(0, 1);
        mpz_class x;
        if (item.empty() || x.set_str(item, 10) != 0) throw UsageError("not an integer: '" + item + "'");
        out.push_back(x);
    }
    if (out.empty()) throw UsageError("no coefficients given");
    return out;
}

/// HW_THREADS, defaulting to 1.
inline unsigned threads_from_env() {
    const char* v = std::getenv("HW_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    const unsigned long n = std::strtoul(v, &end, 10);
    if (*end != '\0' || n == 0) return 1;
    return static_cast<unsigned>(std::min<unsigned long>(n, 64));
}

inline std::string csv_header(int genus, bool with_ap) {
    std::string h = "p";
    for (int i = 1; i <= genus; ++i)
        for (int j = 1; j <= genus; ++j) h += ",w" + std::to_string(i) + std::to_string(j);
    h += ",trace";
    if (with_ap) h += ",a_p";
    return h;
}

/// p,w11,...,wgg,trace[,a_p]
inline std::string csv_line(const HasseWittRecord& rec) {
    std::string line = std::to_string(rec.p);
    for (std::uint64_t x : rec.matrix.entries) line += ',' + std::to_string(x);
    line += ',' + std::to_string(rec.trace);
    if (rec.frobenius_trace) line += ',' + std::to_string(*rec.frobenius_trace);
    return line;
}

inline std::string jsonl_line(const HasseWittRecord& rec) {
    nlohmann::ordered_json j;
    j["p"] = rec.p;
    auto rows = nlohmann::json::array();
    for (int i = 0; i < rec.matrix.dim; ++i) {
        auto row = nlohmann::json::array();
        for (int k = 0; k < rec.matrix.dim; ++k) row.push_back(rec.matrix(i, k));
        rows.push_back(std::move(row));
    }
    j["W"] = std::move(rows);
    j["trace"] = rec.trace;
    j["charpoly"] = rec.charpoly;
    if (rec.frobenius_trace) j["a_p"] = *rec.frobenius_trace;
    j["source"] = to_string(rec.source);
    return j.dump();
}

inline HasseWittOptions options_from(const RunConfig& cfg) {
    HasseWittOptions opt;
    opt.naive_cutoff = cfg.naive_cutoff;
    opt.k = cfg.k;
    opt.k_adjust = cfg.k_adjust;
    opt.safe_mode = cfg.safe_mode;
    opt.threads = cfg.threads;
    return opt;
}

namespace detail {

inline int compute(const CurveModel& c, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.dump_transition)
        for (int i = 1; i <= c.genus; ++i) err << dump_transition(derive_transition(c, i, cfg.safe_mode));
    if (cfg.header && cfg.format == Format::Csv) out << csv_header(c.genus, c.genus == 1) << '\n';
    auto run = compute_hassewitt_matrices(
        c, cfg.bound, options_from(cfg),
        [&](const HasseWittRecord& rec) {
            out << (cfg.format == Format::Csv ? csv_line(rec) : jsonl_line(rec)) << '\n';
        },
        [&] { out.flush(); });
    out.flush();
    if (!run.precision_failures.empty())
        err << "note: " << run.precision_failures.size() << " prime(s) recomputed directly after a precision failure\n";
    return out ? kOk : kIoFailure;
}

inline int verify(const CurveModel& c, const RunConfig& cfg, std::ostream& out) {
    std::mt19937_64 rng(cfg.seed);
    std::bernoulli_distribution pick(std::clamp(cfg.verify_fraction, 0.0, 1.0));
    std::size_t total = 0, checked = 0, mismatches = 0;
    auto run = compute_hassewitt_matrices(c, cfg.bound, options_from(cfg), [&](const HasseWittRecord& rec) {
        ++total;
        if (!pick(rng)) return;
        ++checked;
        if (!(naive_hassewitt(c, rec.p) == rec.matrix)) {
            ++mismatches;
            out << "mismatch at p = " << rec.p << '\n';
        }
    });
    out << "primes " << total << ", checked " << checked << ", mismatches " << mismatches
        << ", precision failures " << run.precision_failures.size() << '\n';
    out.flush();
    if (!out) return kIoFailure;
    return mismatches ? kMathFailure : kOk;
}

inline int bench(const CurveModel& c, const RunConfig& cfg, std::ostream& out) {
    // The sweep covers k = 0 .. l for the leaf depth l of this run.
    int w = 0;
    for (int i = 1; i <= c.genus; ++i) w = std::max(w, precision_parameters(c, i, cfg.safe_mode).w);
    std::vector<std::uint64_t> primes;
    for (std::uint64_t p : admissible_primes(c, cfg.bound).primes)
        if (p >= cfg.naive_cutoff && p >= 2 * static_cast<std::uint64_t>(w) + 3) primes.push_back(p);
    const std::size_t leaves = RowForest::leaves_for(primes, w);
    const int levels = ForestPlan::covering(leaves, 0).levels;
    out << "k,seconds,peak_bytes,forward_transforms,inverse_transforms\n";
    for (int k = 0; k <= levels; ++k) {
        HasseWittOptions opt = options_from(cfg);
        opt.k = k;
        counters().reset();
        const auto t0 = std::chrono::steady_clock::now();
        compute_hassewitt_matrices(c, cfg.bound, opt, [](const HasseWittRecord&) {});
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out << k << ',' << secs << ',' << counters().peak_bytes.load() << ',' << counters().forward_transforms.load()
            << ',' << counters().inverse_transforms.load() << '\n';
        out.flush();
    }
    return out ? kOk : kIoFailure;
}

}  // namespace detail

/// Small built-in corpus covering every (g, r) shape.
inline std::vector<std::vector<long>> selftest_corpus() {
    return {
        {1, 1, 0, 1},              // g=1 r=3
        {0, 1, 0, 1},              // g=1 r=2
        {1, 0, 2, 0, 3},           // g=1 r=4
        {0, 1, 3, 0, 2},           // g=1 r=3, quartic with f0 = 0
        {1, 1, 0, 3, 0, 1},        // g=2 r=5
        {0, 2, -1, 1, 0, 1},       // g=2 r=4
        {2, 0, 1, -1, 0, 3, 1},    // g=2 r=6
        {0, 1, 1, 0, 2, 0, 1},     // g=2 r=5, sextic with f0 = 0
        {19, 17, 13, 11, 7, 5, 3, 2},      // g=3 r=7
        {0, 1, 0, 2, 0, -1, 0, 1},         // g=3 r=6
        {1, -1, 2, 0, 1, 0, 3, 0, 1},      // g=3 r=8
        {0, 3, 1, 0, 0, 2, -1, 0, 1},      // g=3 r=7, octic with f0 = 0
    };
}

inline int selftest(const RunConfig& cfg, std::ostream& out) {
    const std::uint64_t bound = cfg.bound ? cfg.bound : 1024;
    int failures = 0;
    for (const auto& co : selftest_corpus()) {
        const CurveModel c = validate_curve(std::vector<mpz_class>(co.begin(), co.end()));
        RunConfig local = cfg;
        local.bound = bound;
        HasseWittRun run;
        const auto recs = compute_hassewitt_matrices(c, bound, options_from(local), &run);
        std::size_t bad = 0;
        for (const auto& rec : recs)
            if (!(naive_hassewitt(c, rec.p) == rec.matrix)) ++bad;
        out << "g=" << c.genus << " r=" << c.dim << " d=" << c.degree << ": " << recs.size() << " primes, " << bad
            << " mismatches, " << run.precision_failures.size() << " precision failures\n";
        if (bad) ++failures;
    }
    out << (failures ? "FAIL" : "ok") << '\n';
    out.flush();
    if (!out) return kIoFailure;
    return failures ? kMathFailure : kOk;
}

/// Runs one configuration; records go to cfg.output_path if set, else to `out`.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    if (cfg.mode == Mode::Selftest) return selftest(cfg, out);
    std::ofstream file;
    std::ostream* sink = &out;
    if (!cfg.output_path.empty()) {
        file.open(cfg.output_path, std::ios::out | std::ios::trunc);
        if (!file) {
            err << "error: cannot open " << cfg.output_path << " for writing\n";
            return kIoFailure;
        }
        sink = &file;
    }
    CurveModel c;
    try {
        c = validate_curve(cfg.coeffs);
    } catch (const CurveError& e) {
        err << "error: invalid curve: " << e.what() << '\n';
        return kUsage;
    }
    switch (cfg.mode) {
        case Mode::Verify:
            return detail::verify(c, cfg, *sink);
        case Mode::Bench:
            return detail::bench(c, cfg, *sink);
        default:
            return detail::compute(c, cfg, *sink, err);
    }
}

}  // namespace hw::cli
