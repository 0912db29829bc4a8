#include <nudde/verify.hpp>

#include <nudde/demos.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <future>
#include <ostream>

namespace nudde {

PiecewisePolynomial::PiecewisePolynomial(double length, double before, std::vector<Eigen::VectorXd> coefficients)
    : length_(length), before_(before), coeffs_(std::move(coefficients))
{
    if (!(length > 0) || coeffs_.empty())
        throw InvalidInput("piecewise polynomial: need positive segment length and one segment");
}

double PiecewisePolynomial::operator()(double t) const
{
    if (t < 0)
        return before_;
    if (t > end() * (1 + 1e-12) + 1e-12)
        throw InvalidInput("piecewise polynomial evaluated beyond its last segment");
    auto k = static_cast<std::size_t>(std::floor(t / length_));
    k = std::min(k, coeffs_.size() - 1);
    const double s = t - static_cast<double>(k) * length_;
    const Eigen::VectorXd& c = coeffs_[k];
    double acc = 0;
    for (Index j = c.size() - 1; j >= 0; --j)
        acc = acc * s + c(j);
    return acc;
}

PiecewisePolynomial method_of_steps(double a, double b, double delay, double history, double T)
{
    if (a != 0)
        throw InvalidInput("method of steps: only a = 0 is supported, use a fine-grid reference");
    if (!(delay > 0) || !(T >= 0))
        throw InvalidInput("method of steps: need delay > 0 and T >= 0");
    if (T > 10 * delay * (1 + 1e-12))
        throw InvalidInput("method of steps: T may be at most 10 delays");
    const auto segments = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(T / delay - 1e-12)));
    std::vector<Eigen::VectorXd> coeffs;
    Eigen::VectorXd prev = Eigen::VectorXd::Constant(1, history);
    double start = history;
    for (std::size_t k = 0; k < segments; ++k) {
        // P_k(s) = P_{k-1}(delay) + b int_0^s P_{k-1}
        Eigen::VectorXd next = Eigen::VectorXd::Zero(prev.size() + 1);
        next(0) = start;
        for (Index j = 0; j < prev.size(); ++j)
            next(j + 1) = b * prev(j) / static_cast<double>(j + 1);
        double end = 0;
        for (Index j = next.size() - 1; j >= 0; --j)
            end = end * delay + next(j);
        coeffs.push_back(next);
        prev = next;
        start = end;
    }
    return PiecewisePolynomial(delay, history, std::move(coeffs));
}

namespace {

// Cantor function at k / 3^digits by integer ternary digits.
double cantor_triadic(std::int64_t k, int digits)
{
    std::int64_t scale = 1;
    for (int i = 0; i < digits; ++i)
        scale *= 3;
    double result = 0;
    double factor = 0.5;
    for (int i = 0; i < digits; ++i) {
        scale /= 3;
        const std::int64_t digit = k / scale;
        k %= scale;
        if (digit == 1)
            return result + factor;
        if (digit == 2)
            result += factor;
        factor /= 2;
    }
    return result;
}

} // namespace

double cantor(double t)
{
    if (t <= 0)
        return 0;
    if (t >= 1)
        return 1;
    // Doubles such as 7.0 / 27 are read as the triadic rational they round from.
    constexpr int digits = 20;
    const double scaled = t * 3486784401.0; // 3^20
    const double k = std::round(scaled);
    if (std::abs(scaled - k) <= 1e-5 && k >= 3486784401.0)
        return 1;
    if (std::abs(scaled - k) <= 1e-5)
        return cantor_triadic(static_cast<std::int64_t>(k), digits);
    double result = 0;
    double factor = 0.5;
    for (int i = 0; i < 60; ++i) {
        t *= 3;
        const double digit = std::floor(t);
        t -= digit;
        if (digit == 1)
            return result + factor;
        if (digit == 2)
            result += factor;
        factor /= 2;
    }
    return result;
}

Eigen::Matrix2d expm2(const Eigen::Matrix2d& A)
{
    // A = s I + B with tr B = 0, so B^2 = -det(B) I.
    const double s = A.trace() / 2;
    const Eigen::Matrix2d B = A - s * Eigen::Matrix2d::Identity();
    const double q2 = -B.determinant();
    double c;
    double sinc;
    if (std::abs(q2) < 1e-16) {
        c = 1 + q2 / 2;
        sinc = 1 + q2 / 6;
    } else if (q2 > 0) {
        const double q = std::sqrt(q2);
        c = std::cosh(q);
        sinc = std::sinh(q) / q;
    } else {
        const double q = std::sqrt(-q2);
        c = std::cos(q);
        sinc = std::sin(q) / q;
    }
    return std::exp(s) * (c * Eigen::Matrix2d::Identity() + sinc * B);
}

Eigen::Matrix2d conjugation_flow(const Eigen::Matrix2d& T, const Eigen::Matrix2d& K, double t)
{
    return expm2(t * T) * K * expm2(-t * T);
}

Eigen::Matrix4d commutator_matrix(const Eigen::Matrix2d& T)
{
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    Eigen::Matrix4d M;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    M(2 * r + c, 2 * k + l) = T(r, k) * I(c, l) - I(r, k) * T(l, c);
    return M;
}

Eigen::Vector4d vec_row_major(const Eigen::Matrix2d& m)
{
    return Eigen::Vector4d(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
}

namespace {

Eigen::Matrix2d nilpotent_t()
{
    Eigen::Matrix2d T;
    T << 0, 1, 0, 0;
    return T;
}

Eigen::Matrix2d lower_k()
{
    Eigen::Matrix2d K;
    K << 0, 0, 1, 0;
    return K;
}

Eigen::VectorXd scalar(double x) { return Eigen::VectorXd::Constant(1, x); }

double neutral_steps(double t)
{
    if (t <= 0)
        return 0;
    double x = 0;
    double k = 0;
    while (k + 1 <= t) {
        x += 2 - std::pow(2.0, -k);
        k += 1;
    }
    return x + (t - k) * (2 - std::pow(2.0, -k));
}

Eigen::MatrixXd oracle_rows(const Oracle& f, const std::vector<double>& times)
{
    Eigen::MatrixXd out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const Eigen::VectorXd v = f(times[i]);
        if (i == 0)
            out.resize(static_cast<Index>(times.size()), v.size());
        out.row(static_cast<Index>(i)) = v.transpose();
    }
    return out;
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> out;
    for (int i = 0; i <= n; ++i)
        out.push_back(a + (b - a) * i / n);
    return out;
}

Eigen::MatrixXd sampled(const GridFunction& u, const std::vector<double>& times)
{
    Eigen::MatrixXd out(static_cast<Index>(times.size()), u.dim());
    for (std::size_t i = 0; i < times.size(); ++i)
        out.row(static_cast<Index>(i)) = evaluate(u, times[i]).transpose();
    return out;
}

Benchmark analytic(const std::string& name, const std::string& oracle, std::vector<double> times, double tol)
{
    const Oracle f = analytic_oracle(oracle);
    return {name, "analytic", demo_problem(name), std::move(times), tol,
            [f](const Benchmark& b) { return oracle_rows(f, b.times); }};
}

Benchmark fine_grid(const std::string& name, std::vector<double> times, double tol)
{
    return {name, "fine_grid", demo_problem(name), std::move(times), tol,
            [](const Benchmark& b) { return sampled(fine_grid_reference(b.problem, 4), b.times); }};
}

} // namespace

Oracle analytic_oracle(const std::string& name)
{
    if (name == "exponential")
        return [](double t) { return scalar(t < 0 ? 0.0 : std::exp(t)); };
    if (name == "cantor")
        return [](double t) { return scalar(cantor(t)); };
    if (name == "conjugation")
        return [](double t) {
            return Eigen::VectorXd(vec_row_major(t < 0 ? Eigen::Matrix2d::Zero().eval()
                                                       : conjugation_flow(nilpotent_t(), lower_k(), t)));
        };
    if (name == "conjugation-identity")
        return [](double t) {
            const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
            return Eigen::VectorXd(vec_row_major(t < 0 ? Eigen::Matrix2d::Zero().eval()
                                                       : conjugation_flow(nilpotent_t(), I, t)));
        };
    if (name == "neutral-steps")
        return [](double t) { return scalar(neutral_steps(t)); };
    throw InvalidInput("unknown analytic oracle '" + name + "'");
}

std::vector<std::string> analytic_oracle_names()
{
    return {"exponential", "cantor", "conjugation", "conjugation-identity", "neutral-steps"};
}

GridFunction fine_grid_reference(const Problem& prob, int refinement)
{
    if (refinement != 1 && refinement != 2 && refinement != 4 && refinement != 8)
        throw InvalidInput("fine grid reference: refinement must be 1, 2, 4 or 8");
    Problem fine = prob;
    fine.grid = prob.grid.refined(refinement);
    fine.solver.tol = prob.solver.tol / 10;
    return resample(solve(fine).solution, prob.grid);
}

std::vector<Benchmark> benchmarks()
{
    std::vector<Benchmark> list;
    list.push_back(analytic("exponential-ivp", "exponential", linspace(0, 3, 12), 5e-5));
    {
        const PiecewisePolynomial x = method_of_steps(0, -1, 1, 1, 4);
        list.push_back({"delay-linear", "method_of_steps", demo_problem("delay-linear"), linspace(0, 4, 8), 1e-6,
                        [x](const Benchmark& b) {
                            return oracle_rows([&x](double t) { return scalar(x(t)); }, b.times);
                        }});
    }
    list.push_back(analytic("neutral-first-order", "neutral-steps", linspace(0, 4, 8), 1e-6));
    list.push_back(analytic("cantor-forcing", "cantor", linspace(0, 1, 27), 0.0));
    list.push_back(analytic("commutator-flow", "conjugation", linspace(0, 1, 4), 1e-6));
    list.push_back(fine_grid("das-neutral-order-n", linspace(0, 4, 8), 1e-4));
    list.push_back(fine_grid("corduneanu-series-kernel", linspace(0, 4, 8), 1e-4));
    list.push_back(fine_grid("continuous-delay", linspace(0, 4, 8), 1e-4));
    return list;
}

BenchmarkResult run_benchmark(const Benchmark& b)
{
    const auto start = std::chrono::steady_clock::now();
    const SolveReport r = solve(b.problem);
    const Eigen::MatrixXd got = sampled(r.solution, b.times);
    const Eigen::MatrixXd want = b.reference(b);
    const double err = (got - want).cwiseAbs().maxCoeff();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    return {b.name, err, b.tolerance, err <= b.tolerance, dt.count()};
}

std::vector<BenchmarkResult> run_benchmarks(const std::vector<Benchmark>& list)
{
    std::vector<std::future<BenchmarkResult>> jobs;
    for (const auto& b : list)
        jobs.push_back(std::async(std::launch::async, [&b] { return run_benchmark(b); }));
    std::vector<BenchmarkResult> out;
    for (auto& j : jobs)
        out.push_back(j.get());
    return out;
}

void write_benchmark_csv(std::ostream& out, const std::vector<BenchmarkResult>& results)
{
    out << "name,max_error,tolerance,pass,runtime\n";
    char buf[128];
    for (const auto& r : results) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.6f", r.max_error, r.tolerance, r.pass ? "pass" : "fail",
                      r.runtime_seconds);
        out << r.name << ',' << buf << '\n';
    }
}

} // namespace nudde
