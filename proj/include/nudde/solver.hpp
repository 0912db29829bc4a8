#pragma once

#include <nudde/contraction.hpp>
#include <nudde/forcing.hpp>
#include <nudde/operators.hpp>

#include <limits>
#include <optional>
#include <string>

namespace nudde {

/// How the right-hand side enters the iteration.
///  derivative:  u' = F(u) + g, iterate u -> antiderivative(F(u)) + G
///  neutral:     u' = F(u, u') + g, iterate on v = u' with u = antiderivative(v) + J
///  fixed_point: x = F(x) + antiderivative^{forcing_order}(g)
enum class Formulation { derivative, neutral, fixed_point };

std::string to_string(Formulation f);
Formulation formulation_from_string(const std::string& s);

struct SolverSettings {
    double target_contraction = 0.5;
    double tol = 1e-10;
    int max_iter = 1000;
    std::optional<double> nu;
    /// Runs exactly this many steps instead of stopping at tol.
    std::optional<int> exact_iterations;
};

struct Problem {
    Expr rhs;
    Forcing forcing;
    Index dim;
    double p; // infinity selects the sup mode
    Grid grid;
    Formulation form = Formulation::derivative;
    int forcing_order = 1; // fixed_point form only
    SolverSettings solver;

    Weight weight(double nu) const { return Weight(nu, p); }
    void validate() const;
};

struct SolveReport {
    GridFunction solution;
    std::optional<GridFunction> derivative; // neutral form
    double nu_used = 0;
    double p = 2;
    Formulation form = Formulation::derivative;
    double lip_at_nu = 0;
    FixedPointTrace trace;
    double certified_error = 0; // weighted norm at nu_used, of the iterated variable
    double quadrature_tolerance = 0;
};

/// Largest nu tried by select_nu.
inline constexpr double nu_max = 1048576.0; // 2^20

/// First nu in {1, 2, 4, ..., 2^20} with lipschitz_bound(rhs, nu) <= target.
double select_nu(const Expr& rhs, double p, double target);

/// Contraction constant of the iteration map of prob at the weight w.
double step_lipschitz(const Problem& prob, const Weight& w);

/// select_nu on step_lipschitz, or the forced nu of the settings.
double select_nu(const Problem& prob);

SolveReport solve(const Problem& prob);

/// Bound on |u(t) - u_exact(t)| implied by the certificate; +inf where the
/// weighted certificate gives no pointwise control.
double pointwise_error_bound(const SolveReport& report, double t);

struct IvpReport {
    SolveReport report;
    bool zero_before = false;   // u(0-) = 0
    bool initial_value = false; // u(0+) = u0
    bool continuous = false;    // u - Heaviside u0 continuous at 0
};

/// Solves with forcing Dirac(0, u0) added to prob.forcing. The rhs must
/// vanish on inputs supported in (-inf, 0].
IvpReport solve_ivp(const Expr& rhs, const Eigen::VectorXd& u0, Problem prob);

struct CausalityReport {
    double max_pre_cut_change = 0;
    double allowed = 0;
    bool pass = false;
    int iterations = 0;
    double nu = 0;
};

/// Solves prob and prob with perturbation added, at the same nu and the same
/// number of steps, and compares nodes before t_cut.
CausalityReport check_causality(const Problem& prob, double t_cut, const Forcing& perturbation);

struct NuComparison {
    double max_abs_diff = 0;
    double allowed = 0;
    bool pass = false;
    SolveReport first;
    SolveReport second;
};

NuComparison compare_nu(const Problem& prob, double nu1, double nu2);

} // namespace nudde
