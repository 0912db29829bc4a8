#pragma once

#include <nudde/grid.hpp>
#include <nudde/norm_bound.hpp>
#include <nudde/table.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace nudde {

/// Causal cumulative integral from the grid start (equivalently from -inf).
/// Cell [t_{i-1}, t_i] integrates from f(t_{i-1}+) to f(t_i-) by the trapezoid
/// rule, so jumps sitting on nodes are integrated exactly.
template <typename Scalar>
BasicGridFunction<Scalar> antiderivative(const BasicGridFunction<Scalar>& f)
{
    using Matrix = typename BasicGridFunction<Scalar>::Matrix;
    const Scalar half_h = static_cast<Scalar>(f.grid().step()) / 2;
    Matrix out(f.size(), f.dim());
    out.row(0).setZero();
    for (Index i = 1; i < f.size(); ++i)
        out.row(i) = out.row(i - 1) + half_h * (f.values().row(i - 1) + f.left().row(i));
    return {f.grid(), std::move(out)};
}

/// Map applied to every time sample, with a declared Lipschitz constant.
struct PointwiseMap {
    std::string kind; // "linear", "select", "tanh", "sin" or "custom"
    Index in_dim = 1;
    Index out_dim = 1;
    double lipschitz = 0;
    bool linear = false;
    Eigen::MatrixXd matrix; // "linear"
    double scale = 1;       // "tanh" / "sin": scale * fn(x) componentwise
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn;

    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
};

PointwiseMap linear_map(Eigen::MatrixXd matrix);
PointwiseMap componentwise(const std::string& name, Index dim, double scale = 1.0);
PointwiseMap custom_map(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn,
                        Index in_dim, Index out_dim, double lipschitz, bool linear = false);
/// Picks components [first, first + count) of an in_dim vector.
PointwiseMap select_components(Index in_dim, Index first, Index count);

/// History segment theta -> u(t + theta) on [-horizon, 0) at node t.
/// Row j of values holds theta = -j*spacing (row 0 is u(t-), jump nodes are
/// averaged). upper/lower hold the one-sided samples at both ends of cell j,
/// i.e. u(t - j*spacing -) and u(t - (j+1)*spacing +).
struct Segment {
    Eigen::MatrixXd values;
    Eigen::VectorXd weights; // trapezoid weights
    Eigen::MatrixXd upper;
    Eigen::MatrixXd lower;
    double spacing = 0;
};

/// Functional on the history segment u_(t).
struct SegmentMap {
    std::string kind; // "kernel" or "custom"
    Index in_dim = 1;
    Index out_dim = 1;
    bool linear = false;
    Table kernel; // "kernel": k(s) at s = -theta in [0, horizon]
    double horizon = 0;
    std::function<Eigen::VectorXd(const Segment&)> fn;
    /// Lipschitz constant against the L_p segment norm (sup norm for p = inf).
    std::function<double(double)> lipschitz;

    Eigen::VectorXd operator()(const Segment& seg) const;
};

/// phi(psi) = int_0^horizon k(s) psi(-s) ds; Lipschitz |k|_{L_q}.
SegmentMap segment_kernel(const Table& kernel, double horizon, Index dim);
SegmentMap segment_custom(std::function<Eigen::VectorXd(const Segment&)> fn, Index in_dim,
                          Index out_dim, double lipschitz, bool linear = false);

class Expr;

namespace node {
struct AntiDeriv { Index dim; int order; };
struct Shift { Index dim; double theta; };
struct History { double horizon; SegmentMap inner; };
struct Kernel { Index dim; double horizon; Table kernel; };
struct Pointwise { PointwiseMap map; };
struct Coeff { Index dim; Table coeff; };
struct Scale { Index dim; double factor; };
struct Sum { Index in_dim; Index out_dim; std::vector<Expr> terms; };
struct Compose { std::vector<Expr> chain; }; // chain[0] outermost
} // namespace node

using NodeKind = std::variant<node::AntiDeriv, node::Shift, node::History, node::Kernel,
                              node::Pointwise, node::Coeff, node::Scale, node::Sum, node::Compose>;

/// Immutable expression tree of causal operators.
class Expr {
public:
    explicit Expr(NodeKind kind);

    const NodeKind& kind() const { return *kind_; }
    Index in_dim() const { return in_dim_; }
    Index out_dim() const { return out_dim_; }

private:
    std::shared_ptr<const NodeKind> kind_;
    Index in_dim_;
    Index out_dim_;
};

Expr antideriv(Index dim, int order = 1);
Expr shift(Index dim, double theta);
Expr history(double horizon, SegmentMap inner);
Expr kernel_conv(const Table& kernel, double horizon, Index dim);
Expr pointwise(PointwiseMap map);
Expr coeff_mul(const Table& coeff, Index dim);
Expr scale(Index dim, double factor);
Expr sum(std::vector<Expr> terms, Index in_dim, Index out_dim);
Expr zero(Index in_dim, Index out_dim);
Expr compose(const Expr& outer, const Expr& inner);

inline Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}, a.in_dim(), a.out_dim()); }
inline Expr operator*(const Expr& outer, const Expr& inner) { return compose(outer, inner); }
inline Expr operator*(double a, const Expr& e) { return compose(scale(e.out_dim(), a), e); }

GridFunction apply(const Expr& expr, const GridFunction& u);

NormBound norm_bound(const Expr& expr);

/// Evaluates the symbolic bound attached to expr at the weight w.
double lipschitz_bound(const Expr& expr, const Weight& w);

bool is_linear(const Expr& expr);
bool contains_history(const Expr& expr);
/// Largest number of quadrature steps (antiderivatives, kernels, history
/// maps) met along one path through the expression.
int quadrature_depth(const Expr& expr);
std::string describe(const Expr& expr);

/// Largest observed ratio |expr u| / |u| over random probes and the extremal
/// families e^{nu t} * indicator[a, b). Linear expressions only.
double empirical_operator_norm(const Expr& expr, const Weight& w, const Grid& grid, int trials,
                               std::uint64_t seed = 20240611);

} // namespace nudde
