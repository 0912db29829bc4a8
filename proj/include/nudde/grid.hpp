#pragma once

#include <nudde/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

namespace nudde {

using Index = Eigen::Index;

/// Uniform time grid t_i = t_start + i*step, 0 <= i < count. Every function
/// living on a grid is identically zero for t < t_start.
class Grid {
public:
    Grid(double t_start, double step, Index count)
        : t_start_(t_start), step_(step), count_(count)
    {
        if (!std::isfinite(t_start) || !std::isfinite(step) || !(step > 0))
            throw InvalidInput("grid: step must be positive and finite");
        if (count < 2)
            throw InvalidInput("grid: need at least two nodes");
    }

    /// Grid covering [t_start, t_end]; the end is snapped to the nearest node.
    static Grid from_span(double t_start, double t_end, double step)
    {
        if (!(step > 0) || !(t_end > t_start))
            throw InvalidInput("grid: need t_end > t_start and step > 0");
        const auto cells = static_cast<Index>(std::llround((t_end - t_start) / step));
        return Grid(t_start, step, cells + 1);
    }

    double t_start() const { return t_start_; }
    double step() const { return step_; }
    Index count() const { return count_; }
    double t_end() const { return node(count_ - 1); }
    double node(Index i) const { return t_start_ + static_cast<double>(i) * step_; }

    /// Fractional node position of t.
    double position(double t) const { return (t - t_start_) / step_; }

    /// Index of the node at t, if t is a node up to 1e-9 of a step.
    std::optional<Index> node_at(double t) const
    {
        const double pos = position(t);
        const double k = std::round(pos);
        if (std::abs(pos - k) <= 1e-9 && k >= 0 && k < static_cast<double>(count_))
            return static_cast<Index>(k);
        return std::nullopt;
    }

    bool covers(double t) const
    {
        const double pos = position(t);
        return pos >= -1e-9 && pos <= static_cast<double>(count_ - 1) + 1e-9;
    }

    Grid refined(Index factor) const
    {
        return Grid(t_start_, step_ / static_cast<double>(factor), (count_ - 1) * factor + 1);
    }

    friend bool operator==(const Grid& a, const Grid& b)
    {
        const double tol = 1e-12 * std::max(1.0, std::abs(a.t_start_));
        return a.count_ == b.count_ && std::abs(a.t_start_ - b.t_start_) <= tol &&
               std::abs(a.step_ - b.step_) <= 1e-12 * a.step_;
    }

private:
    double t_start_;
    double step_;
    Index count_;
};

/// Exponential weight e^{-nu t} together with the exponent p of the norm.
/// p = infinity selects the sup-weighted (continuous) mode.
class Weight {
public:
    Weight(double nu, double p) : nu_(nu), p_(p)
    {
        if (!std::isfinite(nu) || !(nu > 0))
            throw InvalidInput("weight: nu must be positive");
        if (!(p > 1))
            throw InvalidInput("weight: exponent p must lie in (1, inf]");
    }

    static Weight lp(double nu, double p) { return Weight(nu, p); }
    static Weight sup(double nu) { return Weight(nu, std::numeric_limits<double>::infinity()); }

    double nu() const { return nu_; }
    double p() const { return p_; }
    bool is_sup() const { return std::isinf(p_); }

    /// Conjugate exponent, 1 in sup mode.
    double q() const { return is_sup() ? 1.0 : p_ / (p_ - 1.0); }

    Weight with_nu(double nu) const { return Weight(nu, p_); }

private:
    double nu_;
    double p_;
};

/// (q nu)^{-1/q}: pointwise control e^{-nu t}|f(t)| <= (q nu)^{-1/q} |f'|_{p,nu}.
inline double sobolev_constant(const Weight& w)
{
    const double q = w.q();
    return std::pow(q * w.nu(), -1.0 / q);
}

/// Relative quadrature/truncation tolerance of the discrete weighted operators.
inline double quadrature_tolerance(const Grid& g, const Weight& w)
{
    const double nh = w.nu() * g.step();
    return nh * nh / 6.0 + std::exp(-w.nu() * (g.t_end() - g.t_start()));
}

/// Vector-valued function sampled on a uniform grid.
///
/// Row i of values() holds the right limit f(t_i+), row i of left() the left
/// limit f(t_i-). The two differ only at jump nodes; left().row(0) is always
/// zero because f vanishes before the grid start. Quadrature works cell by
/// cell from f(t_{i-1}+) to f(t_i-), which keeps the trapezoid rule exact on
/// piecewise-linear data with jumps at nodes.
template <typename Scalar>
class BasicGridFunction {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    BasicGridFunction(const Grid& grid, Index dim)
        : grid_(grid), values_(Matrix::Zero(grid.count(), dim)), left_(values_)
    {
        if (dim < 1)
            throw InvalidInput("grid function: dimension must be positive");
    }

    /// Continuous data: left limits equal values except at the grid start.
    BasicGridFunction(const Grid& grid, Matrix values)
        : grid_(grid), values_(std::move(values)), left_(values_)
    {
        check();
    }

    BasicGridFunction(const Grid& grid, Matrix values, Matrix left)
        : grid_(grid), values_(std::move(values)), left_(std::move(left))
    {
        check();
    }

    const Grid& grid() const { return grid_; }
    Index dim() const { return values_.cols(); }
    Index size() const { return values_.rows(); }
    const Matrix& values() const { return values_; }
    const Matrix& left() const { return left_; }

    Scalar operator()(Index i, Index c) const { return values_(i, c); }

    bool has_jump(Index i) const { return values_.row(i) != left_.row(i); }

    BasicGridFunction operator-() const { return {grid_, -values_, -left_}; }

    friend BasicGridFunction operator+(const BasicGridFunction& a, const BasicGridFunction& b)
    {
        a.require_compatible(b);
        return {a.grid_, a.values_ + b.values_, a.left_ + b.left_};
    }

    friend BasicGridFunction operator-(const BasicGridFunction& a, const BasicGridFunction& b)
    {
        a.require_compatible(b);
        return {a.grid_, a.values_ - b.values_, a.left_ - b.left_};
    }

    friend BasicGridFunction operator*(Scalar c, const BasicGridFunction& f)
    {
        return {f.grid_, c * f.values_, c * f.left_};
    }

    friend bool operator==(const BasicGridFunction& a, const BasicGridFunction& b)
    {
        return a.grid_ == b.grid_ && a.values_ == b.values_ && a.left_ == b.left_;
    }

    void require_compatible(const BasicGridFunction& other) const
    {
        if (!(grid_ == other.grid_))
            throw InvalidInput("grid functions live on different grids");
        if (dim() != other.dim())
            throw DimensionMismatch("grid functions have different dimensions");
    }

private:
    void check()
    {
        if (values_.rows() != grid_.count() || left_.rows() != grid_.count())
            throw InvalidInput("grid function: row count does not match grid");
        if (values_.cols() < 1 || left_.cols() != values_.cols())
            throw InvalidInput("grid function: bad column count");
        if (!values_.allFinite() || !left_.allFinite())
            throw InvalidInput("grid function: non-finite sample");
        left_.row(0).setZero();
    }

    Grid grid_;
    Matrix values_;
    Matrix left_;
};

using GridFunction = BasicGridFunction<double>;

/// Weighted norm. L_p mode: (int |f|^p e^{-p nu t} dt)^{1/p} by the trapezoid
/// rule; sup mode: max over nodes (both one-sided limits) of e^{-nu t}|f|.
template <typename Scalar>
Scalar weighted_norm(const BasicGridFunction<Scalar>& f, const Weight& w)
{
    const Grid& g = f.grid();
    const auto& v = f.values();
    const auto& l = f.left();
    const Scalar nu = static_cast<Scalar>(w.nu());
    if (w.is_sup()) {
        Scalar best = 0;
        for (Index i = 0; i < f.size(); ++i) {
            const Scalar damp = std::exp(-nu * static_cast<Scalar>(g.node(i)));
            best = std::max(best, damp * std::max(v.row(i).norm(), l.row(i).norm()));
        }
        return best;
    }
    // Factor e^{-nu t_start} out so late-time weights do not underflow first.
    const Scalar p = static_cast<Scalar>(w.p());
    const Scalar h = static_cast<Scalar>(g.step());
    Scalar sum = 0;
    auto term = [&](Scalar norm, Index i) {
        return std::pow(norm * std::exp(-nu * static_cast<Scalar>(g.node(i) - g.t_start())), p);
    };
    for (Index i = 1; i < f.size(); ++i)
        sum += h / 2 * (term(v.row(i - 1).norm(), i - 1) + term(l.row(i).norm(), i));
    return std::exp(-nu * static_cast<Scalar>(g.t_start())) * std::pow(sum, 1 / p);
}

/// Unweighted maximum of |f - g| over nodes and both one-sided limits.
template <typename Scalar>
Scalar max_abs_diff(const BasicGridFunction<Scalar>& f, const BasicGridFunction<Scalar>& g)
{
    f.require_compatible(g);
    return std::max((f.values() - g.values()).cwiseAbs().maxCoeff(),
                    (f.left() - g.left()).cwiseAbs().maxCoeff());
}

enum class Side { right, left };

/// f(t+) or f(t-) by linear interpolation inside cells; zero before the grid.
template <typename Scalar>
typename BasicGridFunction<Scalar>::Vector
evaluate(const BasicGridFunction<Scalar>& f, double t, Side side = Side::right)
{
    using Vector = typename BasicGridFunction<Scalar>::Vector;
    const Grid& g = f.grid();
    if (auto k = g.node_at(t))
        return side == Side::right ? Vector(f.values().row(*k).transpose())
                                   : Vector(f.left().row(*k).transpose());
    const double pos = g.position(t);
    if (pos < 0)
        return Vector::Zero(f.dim());
    if (pos > static_cast<double>(g.count() - 1))
        throw InvalidInput("evaluation beyond the right end of the grid at t=" + std::to_string(t));
    const auto k = static_cast<Index>(std::floor(pos));
    const Scalar frac = static_cast<Scalar>(pos - static_cast<double>(k));
    return ((1 - frac) * f.values().row(k) + frac * f.left().row(k + 1)).transpose();
}

/// Linear interpolation onto another grid; zero before the support of f.
/// Extending past the right end of f is an error.
template <typename Scalar>
BasicGridFunction<Scalar> resample(const BasicGridFunction<Scalar>& f, const Grid& target)
{
    using Matrix = typename BasicGridFunction<Scalar>::Matrix;
    if (target == f.grid())
        return f;
    if (target.t_end() > f.grid().t_end() + 1e-9 * f.grid().step())
        throw InvalidInput("resample: target grid extends beyond the right end of the data");
    Matrix values(target.count(), f.dim());
    Matrix left(target.count(), f.dim());
    for (Index i = 0; i < target.count(); ++i) {
        const double t = target.node(i);
        values.row(i) = evaluate(f, t, Side::right).transpose();
        left.row(i) = evaluate(f, t, Side::left).transpose();
    }
    return {target, std::move(values), std::move(left)};
}

/// Samples a continuous function at the nodes.
template <typename Scalar = double, typename Fn>
BasicGridFunction<Scalar> sample(const Grid& grid, Index dim, Fn&& fn)
{
    typename BasicGridFunction<Scalar>::Matrix values(grid.count(), dim);
    for (Index i = 0; i < grid.count(); ++i) {
        if constexpr (std::is_invocable_r_v<Scalar, Fn, double>)
            values.row(i).setConstant(fn(grid.node(i)));
        else
            values.row(i) = fn(grid.node(i)).transpose();
    }
    return {grid, std::move(values)};
}

/// amplitude * indicator of [a, b), jumps recorded as one-sided limits.
template <typename Scalar = double>
BasicGridFunction<Scalar> indicator(const Grid& grid, double a, double b,
                                    const typename BasicGridFunction<Scalar>::Vector& amplitude)
{
    using Matrix = typename BasicGridFunction<Scalar>::Matrix;
    Matrix values = Matrix::Zero(grid.count(), amplitude.size());
    Matrix left = values;
    const double eps = 1e-9 * grid.step();
    for (Index i = 0; i < grid.count(); ++i) {
        const double t = grid.node(i);
        if (t >= a - eps && t < b - eps)
            values.row(i) = amplitude.transpose();
        if (t > a + eps && t <= b + eps)
            left.row(i) = amplitude.transpose();
    }
    return {grid, std::move(values), std::move(left)};
}

/// amplitude * Heaviside(t - t0).
template <typename Scalar = double>
BasicGridFunction<Scalar> heaviside(const Grid& grid, double t0,
                                    const typename BasicGridFunction<Scalar>::Vector& amplitude)
{
    return indicator<Scalar>(grid, t0, std::numeric_limits<double>::infinity(), amplitude);
}

/// Concatenates components: (f, g) with dimension f.dim() + g.dim().
template <typename Scalar>
BasicGridFunction<Scalar> hstack(const BasicGridFunction<Scalar>& f, const BasicGridFunction<Scalar>& g)
{
    using Matrix = typename BasicGridFunction<Scalar>::Matrix;
    if (!(f.grid() == g.grid()))
        throw InvalidInput("hstack: grids differ");
    Matrix values(f.size(), f.dim() + g.dim());
    Matrix left(f.size(), f.dim() + g.dim());
    values << f.values(), g.values();
    left << f.left(), g.left();
    return {f.grid(), std::move(values), std::move(left)};
}

/// Components [first, first + count).
template <typename Scalar>
BasicGridFunction<Scalar> components(const BasicGridFunction<Scalar>& f, Index first, Index count)
{
    if (first < 0 || count < 1 || first + count > f.dim())
        throw DimensionMismatch("components: range out of bounds");
    return {f.grid(), f.values().middleCols(first, count), f.left().middleCols(first, count)};
}

} // namespace nudde
