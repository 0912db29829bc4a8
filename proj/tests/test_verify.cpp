#include <doctest.h>

#include <nudde/demos.hpp>
#include <nudde/verify.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace nudde;

namespace {

Eigen::Matrix2d taylor_exp(const Eigen::Matrix2d& A)
{
    Eigen::Matrix2d sum = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d term = Eigen::Matrix2d::Identity();
    for (int k = 1; k < 40; ++k) {
        term = term * A / k;
        sum += term;
    }
    return sum;
}

} // namespace

TEST_CASE("method of steps for x' = -x(t - 1)")
{
    const PiecewisePolynomial x = method_of_steps(0, -1, 1, 1, 4);
    CHECK(x.end() == doctest::Approx(4));
    CHECK(x(-0.5) == 1);
    CHECK(std::abs(x(1)) < 1e-14);
    CHECK(x(2) == doctest::Approx(-0.5));
    // the polynomial pieces satisfy the equation and join continuously
    const double d = 1e-6;
    for (double t : {0.3, 1.2, 1.9, 2.5, 3.7}) {
        const double slope = (x(t + d) - x(t - d)) / (2 * d);
        CHECK(slope == doctest::Approx(-x(t - 1)).epsilon(1e-6));
    }
    for (double t : {1.0, 2.0, 3.0})
        CHECK(x(t - 1e-12) == doctest::Approx(x(t)).epsilon(1e-9));
    CHECK_THROWS_AS(method_of_steps(1, -1, 1, 1, 4), InvalidInput);
}

TEST_CASE("Cantor function")
{
    CHECK(cantor(1.0 / 3) == 0.5);
    CHECK(cantor(2.0 / 3) == 0.5);
    CHECK(cantor(0.25) == doctest::Approx(1.0 / 3));
    CHECK(cantor(-1) == 0);
    CHECK(cantor(2) == 1);
    CHECK(cantor(728 * (1.0 / 728)) == 1);
    CHECK(cantor(1 - 1e-16) == 1);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 200; ++k) {
        const double t = u(rng);
        CHECK(cantor(t / 3) == doctest::Approx(cantor(t) / 2).epsilon(1e-12));
        CHECK(cantor(1 - t) == doctest::Approx(1 - cantor(t)).epsilon(1e-12));
    }
}

TEST_CASE("closed-form 2x2 exponential")
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    for (int k = 0; k < 50; ++k) {
        Eigen::Matrix2d A;
        A << n(rng), n(rng), n(rng), n(rng);
        CHECK((expm2(A) - taylor_exp(A)).cwiseAbs().maxCoeff() < 1e-11);
    }
    Eigen::Matrix2d N;
    N << 0, 3, 0, 0;
    CHECK((expm2(N) - (Eigen::Matrix2d::Identity() + N)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("commutator flow")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    Eigen::Matrix2d T;
    Eigen::Matrix2d S;
    T << n(rng), n(rng), n(rng), n(rng);
    S << n(rng), n(rng), n(rng), n(rng);
    CHECK((commutator_matrix(T) * vec_row_major(S) - vec_row_major(T * S - S * T)).cwiseAbs().maxCoeff() < 1e-14);

    const double d = 1e-5;
    for (double t : {0.0, 0.4, 1.3}) {
        const Eigen::Matrix2d s = conjugation_flow(T, S, t);
        const Eigen::Matrix2d slope = (conjugation_flow(T, S, t + d) - conjugation_flow(T, S, t - d)) / (2 * d);
        CHECK((slope - (T * s - s * T)).cwiseAbs().maxCoeff() < 1e-6);
    }
    CHECK((conjugation_flow(T, S, 0) - S).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("analytic oracles")
{
    const Oracle exp = analytic_oracle("exponential");
    CHECK(exp(1)(0) == doctest::Approx(std::exp(1.0)));
    CHECK(exp(-0.1)(0) == 0);

    const Oracle steps = analytic_oracle("neutral-steps");
    CHECK(steps(1)(0) == doctest::Approx(1));
    CHECK(steps(2)(0) == doctest::Approx(2.5));
    CHECK(steps(1.5)(0) == doctest::Approx(1.75));

    // e^{tT} [[0,0],[1,0]] e^{-tT} = [[t, -t^2], [1, -t]] for T = [[0,1],[0,0]]
    const Eigen::VectorXd c = analytic_oracle("conjugation")(0.5);
    CHECK(c(0) == doctest::Approx(0.5));
    CHECK(c(1) == doctest::Approx(-0.25));
    CHECK(c(2) == doctest::Approx(1));
    CHECK(c(3) == doctest::Approx(-0.5));
    CHECK(analytic_oracle("conjugation-identity")(0.7) == vec_row_major(Eigen::Matrix2d::Identity()).cast<double>());

    CHECK(analytic_oracle_names().size() == 5);
    CHECK_THROWS_AS(analytic_oracle("gaussian"), InvalidInput);
}

TEST_CASE("fine-grid references converge at order two")
{
    Problem prob = demo_problem("exponential-ivp");
    prob.grid = Grid::from_span(-0.25, 3, 1e-2);
    const GridFunction coarse = solve(prob).solution;
    const GridFunction fine = fine_grid_reference(prob, 4);
    const Index k = *prob.grid.node_at(3.0);
    const double e_coarse = std::abs(coarse(k, 0) - std::exp(3.0));
    const double e_fine = std::abs(fine(k, 0) - std::exp(3.0));
    CHECK(e_coarse / e_fine == doctest::Approx(16).epsilon(0.05));
    CHECK_THROWS_AS(fine_grid_reference(prob, 3), InvalidInput);
}

TEST_CASE("benchmark registry")
{
    const std::vector<BenchmarkResult> results = run_benchmarks(benchmarks());
    CHECK(results.size() == 8);
    for (const auto& r : results) {
        CAPTURE(r.name);
        CAPTURE(r.max_error);
        CHECK(r.pass);
    }
    std::ostringstream csv;
    write_benchmark_csv(csv, results);
    CHECK(csv.str().rfind("name,max_error,tolerance,pass,runtime\n", 0) == 0);
}
