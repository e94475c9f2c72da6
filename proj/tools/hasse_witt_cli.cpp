// hasse-witt: Hasse-Witt matrices of y^2 = f(x) modulo all admissible p <= N.
//
//   hasse-witt compute --curve 1,1,0,1 --N 1000
//   hasse-witt verify --curve 0,1,0,1 --N 8192 --verify-fraction 0.25 --seed 7
//   hasse-witt bench --curve 19,17,13,11,7,5,3,2 --N 16384
//   hasse-witt selftest
//
// Coefficients are given in ascending order f_0,f_1,...,f_d.

#include "hasse_witt/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    using namespace hw::cli;
    CLI::App app{"Hasse-Witt matrices of a hyperelliptic curve for all good primes up to N"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string curve, format = "csv";
    std::optional<int> k;

    auto add_common = [&](CLI::App* sub, bool needs_curve) {
        auto* c = sub->add_option("--curve", curve, "coefficients f_0,...,f_d (ascending)");
        if (needs_curve) c->required();
        sub->add_option("--N", cfg.bound, "prime bound")->required(needs_curve);
        sub->add_option("--k", k, "subtree split exponent (overrides the default)")->check(CLI::NonNegativeNumber);
        sub->add_option("--k-adjust", cfg.k_adjust, "constant added to the default split exponent");
        sub->add_option("--naive-cutoff", cfg.naive_cutoff, "primes below this are computed directly");
        sub->add_flag("--safe-mode", cfg.safe_mode, "use moduli p^(d+1) and no exact tail");
    };

    auto* compute = app.add_subcommand("compute", "write one record per admissible prime");
    add_common(compute, true);
    compute->add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    compute->add_option("--output", cfg.output_path, "output file (default stdout)");
    compute->add_flag("--header", cfg.header, "write a CSV header line");
    compute->add_flag("--dump-transition", cfg.dump_transition, "print the transition matrices to stderr");

    auto* verify = app.add_subcommand("verify", "compare a seeded sample of primes with the direct method");
    add_common(verify, true);
    verify->add_option("--verify-fraction", cfg.verify_fraction, "fraction of primes to check")
        ->check(CLI::Range(0.0, 1.0));
    verify->add_option("--seed", cfg.seed, "sampling seed");
    verify->add_option("--output", cfg.output_path, "report file (default stdout)");

    auto* bench = app.add_subcommand("bench", "time and peak memory for every split exponent k");
    add_common(bench, true);
    bench->add_option("--output", cfg.output_path, "report file (default stdout)");

    auto* selftest = app.add_subcommand("selftest", "check the built-in curves against the direct method");
    add_common(selftest, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (compute->parsed())
        cfg.mode = Mode::Compute;
    else if (verify->parsed())
        cfg.mode = Mode::Verify;
    else if (bench->parsed())
        cfg.mode = Mode::Bench;
    else
        cfg.mode = Mode::Selftest;
    cfg.format = format == "jsonl" ? Format::Jsonl : Format::Csv;
    cfg.k = k;
    cfg.threads = threads_from_env();

    try {
        if (!curve.empty()) cfg.coeffs = parse_coefficients(curve);
        return run(cfg);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIoFailure;
    }
}
