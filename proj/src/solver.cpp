#include <nudde/solver.hpp>

#include <cmath>
#include <future>

namespace nudde {

std::string to_string(Formulation f)
{
    switch (f) {
    case Formulation::derivative: return "derivative";
    case Formulation::neutral: return "neutral";
    case Formulation::fixed_point: return "fixed_point";
    }
    return "unknown";
}

Formulation formulation_from_string(const std::string& s)
{
    if (s == "derivative")
        return Formulation::derivative;
    if (s == "neutral")
        return Formulation::neutral;
    if (s == "fixed_point")
        return Formulation::fixed_point;
    throw InvalidInput("unknown formulation '" + s + "'");
}

void Problem::validate() const
{
    if (dim < 1)
        throw InvalidInput("problem: dimension must be positive");
    if (!(p > 1))
        throw InvalidInput("problem: exponent p must lie in (1, inf]");
    const Index in = form == Formulation::neutral ? 2 * dim : dim;
    if (rhs.in_dim() != in || rhs.out_dim() != dim)
        throw DimensionMismatch("problem: rhs maps dimension " + std::to_string(rhs.in_dim()) + " -> " +
                                std::to_string(rhs.out_dim()) + ", expected " + std::to_string(in) + " -> " +
                                std::to_string(dim));
    if (form == Formulation::fixed_point && forcing_order < 1)
        throw InvalidInput("problem: forcing_order must be at least 1");
    const SolverSettings& s = solver;
    if (!(s.target_contraction > 0) || !(s.target_contraction < 1))
        throw InvalidInput("solver: target_contraction must lie in (0, 1)");
    if (!(s.tol > 0) || s.max_iter < 1)
        throw InvalidInput("solver: need tol > 0 and max_iter >= 1");
    if (s.nu && (!(*s.nu > 0) || !std::isfinite(*s.nu)))
        throw InvalidInput("solver: nu override must be positive");
    if (s.exact_iterations && *s.exact_iterations < 1)
        throw InvalidInput("solver: exact_iterations must be positive");
}

double select_nu(const Expr& rhs, double p, double target)
{
    if (!(target > 0) || !(target < 1))
        throw InvalidInput("select_nu: target must lie in (0, 1)");
    for (double nu = 1; nu <= nu_max; nu *= 2)
        if (lipschitz_bound(rhs, Weight(nu, p)) <= target)
            return nu;
    throw NotEventuallyContracting("bound " + norm_bound(rhs).to_string() + " stays above " +
                                   std::to_string(target) + " up to nu = 2^20");
}

double step_lipschitz(const Problem& prob, const Weight& w)
{
    const double bound = lipschitz_bound(prob.rhs, w);
    switch (prob.form) {
    case Formulation::derivative:
        // A history map is only (0,-1)-Lipschitz in the sup mode: no gain from 1/nu.
        if (w.is_sup() && contains_history(prob.rhs))
            return bound;
        return bound / w.nu();
    case Formulation::neutral:
        return bound * (1 + 1 / w.nu());
    case Formulation::fixed_point:
        return bound;
    }
    return bound;
}

double select_nu(const Problem& prob)
{
    prob.validate();
    const double target = prob.solver.target_contraction;
    if (prob.solver.nu) {
        const double nu = *prob.solver.nu;
        const double lip = step_lipschitz(prob, prob.weight(nu));
        if (!(lip < 1))
            throw NotAContraction("forced nu = " + std::to_string(nu) + " gives Lipschitz bound " +
                                  std::to_string(lip) + " >= 1");
        return nu;
    }
    for (double nu = 1; nu <= nu_max; nu *= 2)
        if (step_lipschitz(prob, prob.weight(nu)) <= target)
            return nu;
    throw NotEventuallyContracting("iteration bound for rhs " + describe(prob.rhs) + " stays above " +
                                   std::to_string(target) + " up to nu = 2^20");
}

namespace {

struct Iteration {
    std::function<GridFunction(const GridFunction&)> step;
    GridFunction x0;
    std::optional<GridFunction> offset; // neutral form: u = antiderivative(v) + offset
};

Iteration make_iteration(const Problem& prob)
{
    const Grid& grid = prob.grid;
    const Index d = prob.dim;
    const Expr rhs = prob.rhs;
    switch (prob.form) {
    case Formulation::derivative: {
        GridFunction g0 = forcing_antiderivative(prob.forcing, grid, d);
        auto step = [rhs, g0](const GridFunction& u) { return antiderivative(apply(rhs, u)) + g0; };
        return {step, g0, std::nullopt};
    }
    case Formulation::neutral: {
        GridFunction f_reg = regular_part(prob.forcing, grid, d);
        GridFunction jump = jump_part(prob.forcing, grid, d);
        auto step = [rhs, f_reg, jump](const GridFunction& v) {
            return apply(rhs, hstack(antiderivative(v) + jump, v)) + f_reg;
        };
        return {step, f_reg, jump};
    }
    case Formulation::fixed_point: {
        GridFunction g = forcing_antiderivative(prob.forcing, grid, d);
        for (int k = 1; k < prob.forcing_order; ++k)
            g = antiderivative(g);
        auto step = [rhs, g](const GridFunction& x) { return apply(rhs, x) + g; };
        return {step, g, std::nullopt};
    }
    }
    throw InvalidInput("unknown formulation");
}

SolveReport run(const Problem& prob, double nu, const Iteration& it)
{
    const Weight w = prob.weight(nu);
    const double lip = step_lipschitz(prob, w);
    auto norm = [w](const GridFunction& f) { return weighted_norm(f, w); };
    double tol = prob.solver.tol;
    int max_iter = prob.solver.max_iter;
    if (prob.solver.exact_iterations) {
        tol = std::numeric_limits<double>::denorm_min();
        max_iter = *prob.solver.exact_iterations;
    }
    std::optional<GridFunction> derivative;
    GridFunction solution(prob.grid, prob.dim);
    FixedPointTrace trace;
    if (prob.form == Formulation::neutral) {
        auto lifted = lifted_fixed_point(it.step, norm, lip, it.x0, tol, max_iter, it.offset);
        solution = std::move(lifted.x);
        derivative = std::move(lifted.w);
        trace = std::move(lifted.trace);
    } else {
        auto res = fixed_point(it.step, norm, lip, it.x0, tol, max_iter);
        solution = std::move(res.x);
        trace = std::move(res.trace);
    }
    if (trace.termination == Termination::divergence)
        throw Divergence(trace.diagnostic);
    SolveReport report{std::move(solution), std::move(derivative), nu, prob.p, prob.form, lip, trace,
                       trace.certified_error, quadrature_tolerance(prob.grid, w)};
    return report;
}

// Smallest n with the a-priori bound below tol.
int steps_for(double lip, double d0, double tol, int max_iter)
{
    if (d0 == 0 || lip == 0)
        return 1;
    int n = 1;
    while (n < max_iter && a_priori_bound(lip, n, d0) > tol)
        ++n;
    return n;
}

double pre_cut_change(const GridFunction& a, const GridFunction& b, double t_cut)
{
    const Grid& g = a.grid();
    const double eps = 1e-9 * g.step();
    double change = 0;
    for (Index i = 0; i < g.count(); ++i) {
        const double t = g.node(i);
        if (t > t_cut + eps)
            break;
        change = std::max(change, (a.left().row(i) - b.left().row(i)).cwiseAbs().maxCoeff());
        if (t < t_cut - eps)
            change = std::max(change, (a.values().row(i) - b.values().row(i)).cwiseAbs().maxCoeff());
    }
    return change;
}

} // namespace

SolveReport solve(const Problem& prob)
{
    const double nu = select_nu(prob);
    return run(prob, nu, make_iteration(prob));
}

double pointwise_error_bound(const SolveReport& r, double t)
{
    const Weight w(r.nu_used, r.p);
    const double growth = std::exp(r.nu_used * t);
    const double err = r.certified_error;
    if (w.is_sup()) {
        if (r.form == Formulation::neutral)
            return growth * err / r.nu_used;
        return growth * err;
    }
    switch (r.form) {
    case Formulation::derivative: {
        // u_k - u = antiderivative(F(u_{k-1}) - F(u)), so the derivative of
        // the error is at most nu * lip * (d_last + err) in the weighted norm.
        const double d_last = r.trace.distances.empty() ? 0.0 : r.trace.distances.back();
        return growth * sobolev_constant(w) * r.nu_used * r.lip_at_nu * (d_last + err);
    }
    case Formulation::neutral:
        return growth * sobolev_constant(w) * err;
    case Formulation::fixed_point:
        return std::numeric_limits<double>::infinity();
    }
    return std::numeric_limits<double>::infinity();
}

IvpReport solve_ivp(const Expr& rhs, const Eigen::VectorXd& u0, Problem prob)
{
    if (u0.size() != prob.dim)
        throw DimensionMismatch("solve_ivp: initial value has the wrong dimension");
    const auto k0 = prob.grid.node_at(0.0);
    if (!k0)
        throw InvalidInput("solve_ivp: t = 0 must be a grid node");
    prob.rhs = rhs;
    prob.forcing += dirac(0.0, u0);
    IvpReport out{solve(prob)};
    const GridFunction& u = out.report.solution;
    const double scale = std::max(1.0, u0.cwiseAbs().maxCoeff());
    const double tol = 1e-12 * scale;
    const Eigen::VectorXd right = u.values().row(*k0).transpose();
    const Eigen::VectorXd left = u.left().row(*k0).transpose();
    out.zero_before = left.cwiseAbs().maxCoeff() <= tol;
    out.initial_value = (right - u0).cwiseAbs().maxCoeff() <= tol;
    out.continuous = ((right - u0) - left).cwiseAbs().maxCoeff() <= tol;
    return out;
}

CausalityReport check_causality(const Problem& prob, double t_cut, const Forcing& perturbation)
{
    prob.validate();
    if (!prob.grid.covers(t_cut))
        throw InvalidInput("causality check: t_cut lies outside the grid");
    if (support_start(perturbation) < t_cut - 1e-9 * prob.grid.step())
        throw InvalidInput("causality check: perturbation is supported before t_cut");
    Problem perturbed = prob;
    perturbed.forcing += perturbation;

    const double nu = select_nu(prob);
    const Iteration ia = make_iteration(prob);
    const Iteration ib = make_iteration(perturbed);
    const Weight w = prob.weight(nu);
    const double lip = step_lipschitz(prob, w);
    auto d0 = [&w](const Iteration& it) { return weighted_norm(it.step(it.x0) - it.x0, w); };
    const int n = std::max(steps_for(lip, d0(ia), prob.solver.tol, prob.solver.max_iter),
                           steps_for(lip, d0(ib), prob.solver.tol, prob.solver.max_iter));
    Problem pa = prob;
    pa.solver.exact_iterations = n;
    perturbed.solver.exact_iterations = n;

    auto fa = std::async(std::launch::async, [&] { return run(pa, nu, ia); });
    auto fb = std::async(std::launch::async, [&] { return run(perturbed, nu, ib); });
    const SolveReport ra = fa.get();
    const SolveReport rb = fb.get();

    CausalityReport out;
    out.nu = nu;
    out.iterations = n;
    out.max_pre_cut_change = pre_cut_change(ra.solution, rb.solution, t_cut);
    out.allowed = 2 * (pointwise_error_bound(ra, t_cut) + pointwise_error_bound(rb, t_cut));
    out.pass = out.max_pre_cut_change <= out.allowed;
    return out;
}

NuComparison compare_nu(const Problem& prob, double nu1, double nu2)
{
    Problem p1 = prob;
    Problem p2 = prob;
    p1.solver.nu = nu1;
    p2.solver.nu = nu2;
    auto f1 = std::async(std::launch::async, [&] { return solve(p1); });
    auto f2 = std::async(std::launch::async, [&] { return solve(p2); });
    SolveReport r1 = f1.get();
    SolveReport r2 = f2.get();
    const double diff = max_abs_diff(r1.solution, r2.solution);
    double allowed = 0;
    for (Index i = 0; i < prob.grid.count(); ++i) {
        const double t = prob.grid.node(i);
        allowed = std::max(allowed, pointwise_error_bound(r1, t) + pointwise_error_bound(r2, t));
    }
    const bool pass = diff <= allowed;
    return {diff, allowed, pass, std::move(r1), std::move(r2)};
}

} // namespace nudde
