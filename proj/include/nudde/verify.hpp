#pragma once

#include <nudde/solver.hpp>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace nudde {

/// Piecewise polynomial on consecutive segments [k*length, (k+1)*length),
/// constant before 0.
class PiecewisePolynomial {
public:
    PiecewisePolynomial(double length, double before, std::vector<Eigen::VectorXd> coefficients);

    /// Coefficients of segment k in the local variable s = t - k*length.
    const std::vector<Eigen::VectorXd>& coefficients() const { return coeffs_; }
    double end() const { return length_ * static_cast<double>(coeffs_.size()); }

    double operator()(double t) const;

private:
    double length_;
    double before_;
    std::vector<Eigen::VectorXd> coeffs_;
};

/// Exact solution of x'(t) = a x(t) + b x(t - delay), x = history on
/// [-delay, 0], for t in [0, T]. Only a = 0 is supported.
PiecewisePolynomial method_of_steps(double a, double b, double delay, double history, double T);

/// Cantor function, by ternary digits. Inputs within rounding of k / 3^20
/// are evaluated at that triadic rational.
double cantor(double t);

/// e^A for a 2x2 matrix in closed form.
Eigen::Matrix2d expm2(const Eigen::Matrix2d& A);

/// e^{tT} K e^{-tT}.
Eigen::Matrix2d conjugation_flow(const Eigen::Matrix2d& T, const Eigen::Matrix2d& K, double t);

/// Matrix of S -> TS - ST acting on row-major vec(S).
Eigen::Matrix4d commutator_matrix(const Eigen::Matrix2d& T);

Eigen::Vector4d vec_row_major(const Eigen::Matrix2d& m);

using Oracle = std::function<Eigen::VectorXd(double)>;

/// Registered closed forms: "exponential" (e^t from 1 at t = 0), "cantor",
/// "conjugation" (T = [[0,1],[0,0]], K = [[0,0],[1,0]]), "conjugation-identity"
/// (K = I), "neutral-steps" (x for v = v(t-1)/2 + 1 from 0).
Oracle analytic_oracle(const std::string& name);
std::vector<std::string> analytic_oracle_names();

/// Re-solves prob with step h/refinement and tol/10, resampled to prob.grid.
GridFunction fine_grid_reference(const Problem& prob, int refinement);

struct Benchmark {
    std::string name;
    std::string oracle; // "method_of_steps", "analytic" or "fine_grid"
    Problem problem;
    std::vector<double> times;
    double tolerance;
    /// Reference values, one row per time.
    std::function<Eigen::MatrixXd(const Benchmark&)> reference;
};

struct BenchmarkResult {
    std::string name;
    double max_error = 0;
    double tolerance = 0;
    bool pass = false;
    double runtime_seconds = 0;
};

std::vector<Benchmark> benchmarks();
BenchmarkResult run_benchmark(const Benchmark& b);

/// Runs every benchmark, concurrently.
std::vector<BenchmarkResult> run_benchmarks(const std::vector<Benchmark>& list);

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkResult>& results);

} // namespace nudde
