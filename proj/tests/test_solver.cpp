#include <doctest.h>

#include <nudde/demos.hpp>
#include <nudde/solver.hpp>
#include <nudde/verify.hpp>

#include <cmath>

using namespace nudde;

namespace {

const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);

Problem scalar_problem(Expr rhs, Forcing forcing, const Grid& grid, double p = 2)
{
    return Problem{std::move(rhs), std::move(forcing), 1, p, grid};
}

} // namespace

TEST_CASE("nu selection on an expression")
{
    // e^2 e^{-nu} <= 1/2 first holds on the doubling ladder at nu = 4
    CHECK(select_nu(std::exp(2.0) * shift(1, -1), 2, 0.5) == 4);
    CHECK(select_nu(scale(1, 0), 2, 0.5) == 1);
    // nu^{-1} e^{-nu/2}: 0.61 at nu = 1, 0.18 at nu = 2
    CHECK(select_nu(antideriv(1) * shift(1, -0.5), 2, 0.5) == 2);
    CHECK_THROWS_AS(select_nu(scale(1, 2), 2, 0.5), NotEventuallyContracting);
    CHECK_THROWS_AS(select_nu(scale(1, 0), 2, 1.0), InvalidInput);
}

TEST_CASE("iteration constant per formulation")
{
    const Grid g = Grid::from_span(0, 4, 0.01);
    Problem prob = scalar_problem(scale(1, 3), dirac(0, one), g);
    CHECK(step_lipschitz(prob, Weight::lp(4, 2)) == doctest::Approx(0.75));
    prob.form = Formulation::fixed_point;
    CHECK(step_lipschitz(prob, Weight::lp(4, 2)) == doctest::Approx(3));
    CHECK_THROWS_AS(select_nu(prob), NotEventuallyContracting);

    Problem neutral = scalar_problem(0.25 * pointwise(select_components(2, 1, 1)), grid_forcing(Table::constant(0, 4, one)), g);
    neutral.form = Formulation::neutral;
    CHECK(step_lipschitz(neutral, Weight::lp(2, 2)) == doctest::Approx(0.25 * 1.5));

    const Expr hist = pointwise(componentwise("tanh", 1)) *
                      history(1, segment_kernel(Table::constant(0, 1, one), 1, 1));
    Problem sup = scalar_problem(hist, dirac(0, one), g, std::numeric_limits<double>::infinity());
    CHECK(step_lipschitz(sup, Weight::sup(8)) == doctest::Approx(1));
    CHECK_THROWS_AS(select_nu(sup), NotEventuallyContracting);
    // L_2 mode: (2 nu)^{-1/2} |1|_{L_2(0,1)} / nu is 0.71 at nu = 1, 0.25 at nu = 2
    sup.p = 2;
    CHECK(select_nu(sup) == 2);

    Problem forced = scalar_problem(scale(1, 3), dirac(0, one), g);
    forced.solver.nu = 2;
    CHECK_THROWS_AS(select_nu(forced), NotAContraction);
    forced.solver.nu = 8;
    CHECK(select_nu(forced) == 8);
}

TEST_CASE("problem validation")
{
    const Grid g = Grid::from_span(0, 1, 0.1);
    Problem prob = scalar_problem(shift(2, -1), dirac(0, one), g);
    CHECK_THROWS_AS(prob.validate(), DimensionMismatch);
    prob = scalar_problem(shift(1, -1), dirac(0, one), g);
    prob.solver.tol = 0;
    CHECK_THROWS_AS(prob.validate(), InvalidInput);
    prob.solver.tol = 1e-6;
    prob.solver.target_contraction = 1;
    CHECK_THROWS_AS(prob.validate(), InvalidInput);
    CHECK(formulation_from_string(to_string(Formulation::neutral)) == Formulation::neutral);
    CHECK_THROWS_AS(formulation_from_string("implicit"), InvalidInput);
}

TEST_CASE("exponential growth from a unit impulse")
{
    const Grid g = Grid::from_span(-0.25, 3, 1e-3);
    const SolveReport r = solve(scalar_problem(scale(1, 1), dirac(0, one), g));
    CHECK(r.trace.termination == Termination::tolerance);
    CHECK(r.certified_error <= 1e-10);
    double err = 0;
    for (Index i = 0; i < g.count(); ++i) {
        const double t = g.node(i);
        err = std::max(err, std::abs(r.solution(i, 0) - (t < 0 ? 0.0 : std::exp(t))));
    }
    CHECK(err < 5e-5);
    const Index k0 = *g.node_at(0.0);
    CHECK(r.solution.left()(k0, 0) == 0);
    CHECK(r.solution(k0, 0) == 1);
}

TEST_CASE("certified error dominates the distance to the converged iterate")
{
    const Grid g = Grid::from_span(0, 3, 2e-3);
    for (double p : {2.0, std::numeric_limits<double>::infinity()}) {
        Problem loose = scalar_problem((-0.8) * shift(1, -0.5) + 0.6 * kernel_conv(Table::constant(0, 1, one), 1, 1),
                                       dirac(0, one), g, p);
        loose.solver.tol = 1e-4;
        Problem tight = loose;
        tight.solver.tol = 1e-15;
        tight.solver.nu = select_nu(loose);
        const SolveReport a = solve(loose);
        const SolveReport b = solve(tight);
        CHECK(weighted_norm(a.solution - b.solution, Weight(a.nu_used, p)) <= a.certified_error * (1 + 1e-9));
        for (Index i = 0; i < g.count(); i += 50) {
            const double t = g.node(i);
            CHECK(std::abs(a.solution(i, 0) - b.solution(i, 0)) <= pointwise_error_bound(a, t) + 1e-12);
        }
    }
}

TEST_CASE("initial value problems")
{
    const Grid g = Grid::from_span(-0.5, 2, 1e-2);
    const IvpReport flat = solve_ivp(zero(1, 1), Eigen::VectorXd::Constant(1, 7), scalar_problem(zero(1, 1), {}, g));
    CHECK(flat.zero_before);
    CHECK(flat.initial_value);
    CHECK(flat.continuous);
    CHECK(flat.report.solution(g.count() - 1, 0) == 7);

    // S' = TS - ST from S(0) = I stays at I
    Eigen::Matrix2d T;
    T << 0, 1, 0, 0;
    Problem m{zero(4, 4), {}, 4, std::numeric_limits<double>::infinity(), Grid::from_span(0, 2, 1e-2)};
    const IvpReport id = solve_ivp(pointwise(linear_map(commutator_matrix(T))),
                                   vec_row_major(Eigen::Matrix2d::Identity()), m);
    CHECK(id.initial_value);
    for (Index i = 0; i < id.report.solution.size(); ++i)
        CHECK((id.report.solution.values().row(i).transpose() - vec_row_major(Eigen::Matrix2d::Identity()))
                  .cwiseAbs()
                  .maxCoeff() < 1e-12);

    CHECK_THROWS_AS(solve_ivp(zero(1, 1), Eigen::Vector2d(1, 1), scalar_problem(zero(1, 1), {}, g)), DimensionMismatch);
    CHECK_THROWS_AS(solve_ivp(zero(1, 1), one, scalar_problem(zero(1, 1), {}, Grid::from_span(0.05, 1, 0.1))),
                    InvalidInput);
}

TEST_CASE("history before the origin")
{
    // x = 1 on [-1, 0), then x' = -x(t - 1): x = 1 - t on [0, 1), x(2) = -1/2
    const Grid g = Grid::from_span(-1, 3, 1e-3);
    Problem prob = scalar_problem((-1.0) * shift(1, -1), dirac(-1, one), g);
    prob.solver.tol = 1e-12;
    const SolveReport r = solve(prob);
    CHECK(r.solution(*g.node_at(-0.5), 0) == doctest::Approx(1));
    CHECK(std::abs(r.solution(*g.node_at(1.0), 0)) < 1e-9);
    CHECK(r.solution(*g.node_at(2.0), 0) == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("neutral first-order equation")
{
    const SolveReport r = solve(demo_problem("neutral-first-order"));
    const Grid& g = r.solution.grid();
    REQUIRE(r.derivative);
    CHECK(r.solution(*g.node_at(2.0), 0) == doctest::Approx(2.5).epsilon(1e-9));
    // residual: v(t) - v(t - 1)/2 - 1 = 0
    double residual = 0;
    for (Index i = *g.node_at(1.0); i < g.count(); ++i)
        residual = std::max(residual, std::abs((*r.derivative)(i, 0) - 0.5 * (*r.derivative)(i - 1000, 0) - 1));
    CHECK(residual < 1e-9);
}

TEST_CASE("a wrong declared Lipschitz constant raises divergence")
{
    const Grid g = Grid::from_span(0, 2, 1e-2);
    const PointwiseMap lying = custom_map([](const Eigen::VectorXd& x) { return Eigen::VectorXd(50 * x); }, 1, 1, 0.1, true);
    Problem prob = scalar_problem(pointwise(lying), dirac(0, one), g);
    prob.solver.nu = 1;
    prob.solver.max_iter = 200;
    CHECK_THROWS_AS(solve(prob), Divergence);
}

TEST_CASE("future forcing leaves the past untouched")
{
    for (const std::string& name : demo_names()) {
        const Problem prob = demo_problem(name);
        const double t_cut = prob.grid.node(prob.grid.count() / 2);
        const CausalityReport r = check_causality(prob, t_cut, dirac(t_cut, Eigen::VectorXd::Ones(prob.dim)));
        CAPTURE(name);
        CHECK(r.pass);
        CHECK(r.max_pre_cut_change == 0);
    }
    const Problem prob = demo_problem("delay-linear");
    CHECK_THROWS_AS(check_causality(prob, 1.0, dirac(0.5, one)), InvalidInput);
}

TEST_CASE("solutions do not depend on nu")
{
    Problem prob = demo_problem("delay-linear");
    prob.solver.tol = 1e-12;
    const NuComparison c = compare_nu(prob, 2, 4);
    CHECK(c.pass);
    CHECK(c.max_abs_diff < 1e-8);
    CHECK(c.first.nu_used == 2);
    CHECK(c.second.nu_used == 4);
}
