// nudde: solve, check and demo front end.
#include <nudde/demos.hpp>
#include <nudde/solver.hpp>
#include <nudde/spec_io.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace nudde;

namespace {

struct Overrides {
    std::optional<double> nu;
    std::optional<double> tol;
    std::optional<int> max_iter;

    void apply(Problem& prob) const
    {
        if (nu)
            prob.solver.nu = *nu;
        if (tol)
            prob.solver.tol = *tol;
        if (max_iter)
            prob.solver.max_iter = *max_iter;
        prob.validate();
    }
};

fs::path report_path(const fs::path& csv)
{
    fs::path out = csv;
    out.replace_extension(".report.json");
    return out;
}

void write_outputs(const SolveReport& report, const fs::path& csv)
{
    if (csv.has_parent_path())
        fs::create_directories(csv.parent_path());
    std::ofstream out(csv);
    if (!out)
        throw InvalidInput("cannot write '" + csv.string() + "'");
    write_solution_csv(out, report.solution);
    std::ofstream rep(report_path(csv));
    rep << report_json(report).dump(2) << '\n';
}

void print_summary(const SolveReport& r)
{
    std::printf("nu = %g  lip = %.6g  iterations = %d  certified error = %.3e  (%s)\n", r.nu_used, r.lip_at_nu,
                r.trace.iterations, r.certified_error, to_string(r.trace.termination).c_str());
}

void print_row(const char* check, double value, double allowed, bool pass)
{
    std::printf("%-18s %-24s %-24s %s\n", check, format_double(value).c_str(), format_double(allowed).c_str(),
                pass ? "PASS" : "FAIL");
}

int run_solve(const std::string& spec, const std::string& out, const Overrides& o)
{
    Problem prob = load_problem(spec);
    o.apply(prob);
    const SolveReport r = solve(prob);
    write_outputs(r, out);
    print_summary(r);
    return 0;
}

int run_check(const std::string& kind, const std::string& spec, const Overrides& o)
{
    Problem prob = load_problem(spec);
    o.apply(prob);
    std::printf("%-18s %-24s %-24s %s\n", "check", "value", "allowed", "result");
    bool pass = false;
    if (kind == "causality") {
        const double t_cut = prob.grid.node(prob.grid.count() / 2);
        const CausalityReport r =
            check_causality(prob, t_cut, dirac(t_cut, Eigen::VectorXd::Ones(prob.dim)));
        print_row("pre-cut change", r.max_pre_cut_change, r.allowed, r.pass);
        pass = r.pass;
    } else if (kind == "nu-independence") {
        const double nu1 = std::max(2.0, select_nu(prob));
        const NuComparison r = compare_nu(prob, nu1, 2 * nu1);
        std::printf("nu1 = %g, nu2 = %g\n", nu1, 2 * nu1);
        print_row("max |u1 - u2|", r.max_abs_diff, r.allowed, r.pass);
        pass = r.pass;
    } else if (kind == "norms") {
        const double nu = prob.solver.nu ? *prob.solver.nu : select_nu(prob);
        const Weight w = prob.weight(nu);
        const double bound = lipschitz_bound(prob.rhs, w);
        const double empirical = empirical_operator_norm(prob.rhs, w, prob.grid, 20);
        const double slack =
            std::pow(1 + quadrature_tolerance(prob.grid, w), std::max(1, quadrature_depth(prob.rhs)));
        std::printf("rhs = %s, nu = %g\n", describe(prob.rhs).c_str(), nu);
        pass = empirical <= bound * slack;
        print_row("empirical norm", empirical, bound * slack, pass);
        if (bound > 0)
            std::printf("empirical / bound = %.9f\n", empirical / bound);
    } else {
        throw InvalidInput("unknown check '" + kind + "'; use causality, nu-independence or norms");
    }
    return pass ? 0 : 1;
}

int run_demo(const std::string& name, const std::string& dir, const Overrides& o)
{
    const nlohmann::json spec = demo_spec(name);
    Problem prob = parse_problem(spec);
    o.apply(prob);
    fs::create_directories(dir);
    const fs::path base = fs::path(dir) / name;
    std::ofstream(fs::path(base).replace_extension(".json")) << spec.dump(2) << '\n';
    const SolveReport r = solve(prob);
    write_outputs(r, fs::path(base).replace_extension(".csv"));
    print_summary(r);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Delay, neutral and integro-differential equations in exponentially weighted spaces"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides o;
    app.add_option("--nu", o.nu, "Force the weight nu");
    app.add_option("--tol", o.tol, "Certified error target in the weighted norm");
    app.add_option("--max-iter", o.max_iter, "Iteration limit");

    std::string spec;
    std::string out;
    auto* solve_cmd = app.add_subcommand("solve", "Solve a problem spec");
    solve_cmd->add_option("spec", spec, "Problem spec (JSON)")->required();
    solve_cmd->add_option("-o,--output", out, "Solution CSV")->required();

    std::string kind;
    auto* check_cmd = app.add_subcommand("check", "Run a property check");
    check_cmd->add_option("kind", kind, "causality, nu-independence or norms")->required();
    check_cmd->add_option("spec", spec, "Problem spec (JSON)")->required();

    std::string name;
    std::string dir = ".";
    auto* demo_cmd = app.add_subcommand("demo", "Write spec, solution and report of a demo");
    demo_cmd->add_option("name", name, "Demo name")->required();
    demo_cmd->add_option("-o,--output", dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*solve_cmd)
            return run_solve(spec, out, o);
        if (*check_cmd)
            return run_check(kind, spec, o);
        return run_demo(name, dir, o);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NotEventuallyContracting& e) {
        std::cerr << "not eventually contracting: " << e.what() << '\n';
        return 3;
    } catch (const NotAContraction& e) {
        std::cerr << "not a contraction: " << e.what() << '\n';
        return 3;
    } catch (const Divergence& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
