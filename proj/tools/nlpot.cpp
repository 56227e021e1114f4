// nlpot CLI: potential | solve | verify | exponents | manufacture.
//
// Exit codes: 0 success, 1 a hard assertion or convergence failure,
// 2 configuration or parameter-validation error (including requests in
// the regime where the equation has no nontrivial solution).
#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "nlpot/scenario.hpp"

namespace {

nlpot::Rational parse_rational_flag(const std::string& flag, const std::string& text) {
    const auto r = nlpot::Rational::parse(text);
    if (!r) throw std::invalid_argument(flag + ": not a rational: " + text);
    return *r;
}

nlpot::ProblemParams params_from_strings(int n, const std::string& p, const std::string& q,
                                         const std::string& alpha, const std::string& r) {
    nlpot::ProblemParams pp;
    pp.n = n;
    pp.p = parse_rational_flag("--p", p);
    pp.q = parse_rational_flag("--q", q);
    pp.alpha = parse_rational_flag("--alpha", alpha);
    pp.r = parse_rational_flag("--r", r);
    return pp;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical toolkit for nonlinear potential theory"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker thread cap (0 = all cores)");

    std::string pot_config, solve_config, man_config;
    auto* c_pot = app.add_subcommand("potential", "evaluate a potential from a scenario config");
    c_pot->fallthrough();
    c_pot->add_option("--config", pot_config, "scenario config file")
        ->required()
        ->check(CLI::ExistingFile);

    auto* c_solve = app.add_subcommand("solve", "run the monotone fixed-point iteration");
    c_solve->fallthrough();
    c_solve->add_option("--config", solve_config, "scenario config file")
        ->required()
        ->check(CLI::ExistingFile);

    auto* c_man = app.add_subcommand("manufacture",
                                     "build a manufactured solution pair (sigma, u*)");
    c_man->fallthrough();
    c_man->add_option("--config", man_config, "scenario config file")
        ->required()
        ->check(CLI::ExistingFile);

    std::string check = "all", verify_out;
    std::uint64_t seed = 1;
    int points = 200, trials = 5;
    auto* c_ver = app.add_subcommand("verify", "run the built-in inequality checks");
    c_ver->fallthrough();
    c_ver->add_option("--check", check,
                      "iterated|wmp|lower-bound|maximal|domination|weighted-norm|chain|all");
    c_ver->add_option("--seed", seed, "rng seed for measures, points, and trial weights");
    c_ver->add_option("--points", points, "number of random evaluation points");
    c_ver->add_option("--trials", trials, "random weights per norm inequality");
    c_ver->add_option("--out", verify_out, "also write the report to this file");

    int en = 3;
    std::string ep = "2", eq = "1/2", ealpha = "1", er = "2";
    auto* c_exp = app.add_subcommand("exponents", "derive the exponent set for parameters");
    c_exp->fallthrough();
    c_exp->add_option("--n", en, "ambient dimension");
    c_exp->add_option("--p", ep, "p (rational, e.g. 3/2)");
    c_exp->add_option("--q", eq, "q (rational)");
    c_exp->add_option("--alpha", ealpha, "alpha (rational)");
    c_exp->add_option("--r", er, "target Lebesgue exponent r (rational)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    nlpot::set_thread_cap(threads);
    try {
        nlpot::RunResult res;
        if (c_pot->parsed()) {
            res = nlpot::run_potential(nlpot::scenario_from_file(pot_config));
        } else if (c_solve->parsed()) {
            res = nlpot::run_solve(nlpot::scenario_from_file(solve_config));
        } else if (c_man->parsed()) {
            res = nlpot::run_manufacture(nlpot::scenario_from_file(man_config));
        } else if (c_ver->parsed()) {
            res = nlpot::run_verify(seed, points, trials, check);
            if (!verify_out.empty()) nlpot::write_report_file(verify_out, res.report);
        } else if (c_exp->parsed()) {
            res = nlpot::run_exponents(params_from_strings(en, ep, eq, ealpha, er));
        }
        std::cout << nlpot::dump_report(res.report);
        return res.ok ? 0 : 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
