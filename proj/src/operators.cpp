#include <nudde/operators.hpp>

#include <cmath>
#include <random>
#include <sstream>

namespace nudde {

namespace {

template <class... Ts>
struct Overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Number of whole cells inside a horizon; partial cells are dropped.
Index cells_in(double horizon, double h) { return static_cast<Index>(std::floor(horizon / h + 1e-9)); }

void require_kernel_table(const Table& kernel, double horizon, Index dim)
{
    if (!(horizon > 0) || !std::isfinite(horizon))
        throw InvalidInput("kernel horizon must be positive and finite");
    if (!table_shape_ok(kernel, dim))
        throw DimensionMismatch("kernel table has " + std::to_string(kernel.columns()) +
                                " value columns; expected 1, d or d*d");
    if (kernel.last_time() < horizon * (1 - 1e-12))
        throw InvalidInput("kernel table ends before its horizon");
}

// sum_j h/2 (B(jh+) u(t - jh -) + B((j+1)h -) u(t - (j+1)h +)) over m cells,
// evaluated for all nodes at once.
Eigen::MatrixXd convolve(const Table& kernel, double horizon, Index dim, const GridFunction& u)
{
    const double h = u.grid().step();
    const Index n = u.size();
    const Index m = std::min(cells_in(horizon, h), n - 1);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, u.dim());
    const bool scalar = kernel.columns() == 1;
    for (Index j = 0; j < m; ++j) {
        const Eigen::VectorXd upper = kernel.eval(j * h, Side::right);
        const Eigen::VectorXd lower = kernel.eval((j + 1) * h, Side::left);
        // upper end: u(t_i - jh -) = left(i - j); lower end: values(i - j - 1)
        if (scalar) {
            out.bottomRows(n - j) += (h / 2 * upper(0)) * u.left().topRows(n - j);
            out.bottomRows(n - j - 1) += (h / 2 * lower(0)) * u.values().topRows(n - j - 1);
        } else {
            const Eigen::MatrixXd bu = as_operator(upper, dim).transpose();
            const Eigen::MatrixXd bl = as_operator(lower, dim).transpose();
            out.bottomRows(n - j) += (h / 2) * (u.left().topRows(n - j) * bu);
            out.bottomRows(n - j - 1) += (h / 2) * (u.values().topRows(n - j - 1) * bl);
        }
    }
    return out;
}

GridFunction apply_shift(const node::Shift& s, const GridFunction& u)
{
    const Grid& g = u.grid();
    const double off = s.theta / g.step();
    const double k_off = std::round(off);
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(u.size(), u.dim());
    Eigen::MatrixXd left = values;
    if (std::abs(off - k_off) <= 1e-9) {
        const auto k = static_cast<Index>(-k_off);
        if (k < u.size()) {
            values.bottomRows(u.size() - k) = u.values().topRows(u.size() - k);
            left.bottomRows(u.size() - k) = u.left().topRows(u.size() - k);
        }
        return {g, std::move(values), std::move(left)};
    }
    for (Index i = 0; i < u.size(); ++i) {
        const double pos = static_cast<double>(i) + off;
        if (pos < 0)
            continue;
        const auto k = static_cast<Index>(std::floor(pos));
        const double frac = pos - static_cast<double>(k);
        values.row(i) = (1 - frac) * u.values().row(k) + frac * u.left().row(k + 1);
        left.row(i) = values.row(i);
    }
    return {g, std::move(values), std::move(left)};
}

GridFunction apply_history(const node::History& hnode, const GridFunction& u)
{
    const SegmentMap& inner = hnode.inner;
    if (inner.kind == "kernel")
        return {u.grid(), convolve(inner.kernel, hnode.horizon, u.dim(), u)};
    const double h = u.grid().step();
    const Index n = u.size();
    const Index m = cells_in(hnode.horizon, h);
    if (m < 1)
        throw InvalidInput("history horizon shorter than one grid step");
    Segment seg;
    seg.spacing = h;
    seg.weights = Eigen::VectorXd::Constant(m + 1, h);
    seg.weights(0) = seg.weights(m) = h / 2;
    seg.values.resize(m + 1, u.dim());
    seg.upper.resize(m, u.dim());
    seg.lower.resize(m, u.dim());
    Eigen::MatrixXd out(n, inner.out_dim);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < m; ++j) {
            const Index k = i - j;
            seg.upper.row(j) = k >= 0 ? Eigen::RowVectorXd(u.left().row(k)) : Eigen::RowVectorXd::Zero(u.dim());
            seg.lower.row(j) = k - 1 >= 0 ? Eigen::RowVectorXd(u.values().row(k - 1))
                                          : Eigen::RowVectorXd::Zero(u.dim());
        }
        seg.values.row(0) = seg.upper.row(0);
        for (Index j = 1; j < m; ++j)
            seg.values.row(j) = 0.5 * (seg.lower.row(j - 1) + seg.upper.row(j));
        seg.values.row(m) = seg.lower.row(m - 1);
        out.row(i) = inner(seg).transpose();
    }
    return {u.grid(), std::move(out)};
}

GridFunction apply_pointwise(const PointwiseMap& map, const GridFunction& u)
{
    if (map.kind == "linear" || map.kind == "select") {
        return {u.grid(), u.values() * map.matrix.transpose(), u.left() * map.matrix.transpose()};
    }
    Eigen::MatrixXd values(u.size(), map.out_dim);
    Eigen::MatrixXd left(u.size(), map.out_dim);
    for (Index i = 0; i < u.size(); ++i) {
        values.row(i) = map(u.values().row(i).transpose()).transpose();
        if (u.has_jump(i))
            left.row(i) = map(u.left().row(i).transpose()).transpose();
        else
            left.row(i) = values.row(i);
    }
    return {u.grid(), std::move(values), std::move(left)};
}

GridFunction apply_coeff(const node::Coeff& c, const GridFunction& u)
{
    const GridFunction table = c.coeff.on_grid(u.grid());
    Eigen::MatrixXd values(u.size(), u.dim());
    Eigen::MatrixXd left(u.size(), u.dim());
    if (c.coeff.columns() == 1 || c.coeff.columns() == c.dim) {
        const auto diag = [&](const Eigen::MatrixXd& t, Index i) {
            return c.coeff.columns() == 1 ? Eigen::RowVectorXd::Constant(u.dim(), t(i, 0))
                                          : Eigen::RowVectorXd(t.row(i));
        };
        for (Index i = 0; i < u.size(); ++i) {
            values.row(i) = u.values().row(i).cwiseProduct(diag(table.values(), i));
            left.row(i) = u.left().row(i).cwiseProduct(diag(table.left(), i));
        }
    } else {
        for (Index i = 0; i < u.size(); ++i) {
            values.row(i) = u.values().row(i) * as_operator(table.values().row(i).transpose(), c.dim).transpose();
            left.row(i) = u.left().row(i) * as_operator(table.left().row(i).transpose(), c.dim).transpose();
        }
    }
    return {u.grid(), std::move(values), std::move(left)};
}

double coeff_sup(const Table& coeff, Index dim)
{
    double best = 0;
    for (Index i = 0; i < coeff.rows(); ++i)
        best = std::max(best, operator_norm(coeff.values().row(i).transpose(), dim));
    return best;
}

Eigen::MatrixXd selection_matrix(Index in_dim, Index first, Index count)
{
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(count, in_dim);
    for (Index r = 0; r < count; ++r)
        m(r, first + r) = 1;
    return m;
}

std::pair<Index, Index> dims_of(const NodeKind& kind)
{
    return std::visit(Overloaded{
        [](const node::AntiDeriv& a) { return std::pair{a.dim, a.dim}; },
        [](const node::Shift& s) { return std::pair{s.dim, s.dim}; },
        [](const node::History& h) { return std::pair{h.inner.in_dim, h.inner.out_dim}; },
        [](const node::Kernel& k) { return std::pair{k.dim, k.dim}; },
        [](const node::Pointwise& p) { return std::pair{p.map.in_dim, p.map.out_dim}; },
        [](const node::Coeff& c) { return std::pair{c.dim, c.dim}; },
        [](const node::Scale& s) { return std::pair{s.dim, s.dim}; },
        [](const node::Sum& s) { return std::pair{s.in_dim, s.out_dim}; },
        [](const node::Compose& c) { return std::pair{c.chain.back().in_dim(), c.chain.front().out_dim()}; },
    }, kind);
}

} // namespace

Eigen::VectorXd PointwiseMap::operator()(const Eigen::VectorXd& x) const
{
    if (x.size() != in_dim)
        throw DimensionMismatch("pointwise map: input has wrong dimension");
    if (kind == "linear" || kind == "select")
        return matrix * x;
    if (kind == "tanh")
        return scale * x.array().tanh().matrix();
    if (kind == "sin")
        return scale * x.array().sin().matrix();
    Eigen::VectorXd y = fn(x);
    if (y.size() != out_dim)
        throw DimensionMismatch("pointwise map: output has wrong dimension");
    return y;
}

PointwiseMap linear_map(Eigen::MatrixXd matrix)
{
    if (matrix.size() == 0 || !matrix.allFinite())
        throw InvalidInput("linear map: matrix must be nonempty and finite");
    PointwiseMap m;
    m.kind = "linear";
    m.in_dim = matrix.cols();
    m.out_dim = matrix.rows();
    m.linear = true;
    m.lipschitz = Eigen::JacobiSVD<Eigen::MatrixXd>(matrix).singularValues()(0);
    m.matrix = std::move(matrix);
    return m;
}

PointwiseMap componentwise(const std::string& name, Index dim, double scale)
{
    if (name != "tanh" && name != "sin")
        throw InvalidInput("unknown componentwise map '" + name + "'");
    if (dim < 1 || !std::isfinite(scale))
        throw InvalidInput("componentwise map: bad dimension or scale");
    PointwiseMap m;
    m.kind = name;
    m.in_dim = m.out_dim = dim;
    m.scale = scale;
    m.lipschitz = std::abs(scale);
    m.linear = scale == 0;
    return m;
}

PointwiseMap custom_map(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn, Index in_dim,
                        Index out_dim, double lipschitz, bool linear)
{
    if (!(lipschitz >= 0) || in_dim < 1 || out_dim < 1)
        throw InvalidInput("custom map: bad dimensions or Lipschitz constant");
    PointwiseMap m;
    m.kind = "custom";
    m.in_dim = in_dim;
    m.out_dim = out_dim;
    m.lipschitz = lipschitz;
    m.linear = linear;
    m.fn = std::move(fn);
    return m;
}

PointwiseMap select_components(Index in_dim, Index first, Index count)
{
    if (first < 0 || count < 1 || first + count > in_dim)
        throw DimensionMismatch("select: component range out of bounds");
    PointwiseMap m;
    m.kind = "select";
    m.in_dim = in_dim;
    m.out_dim = count;
    m.lipschitz = 1;
    m.linear = true;
    m.matrix = selection_matrix(in_dim, first, count);
    return m;
}

Eigen::VectorXd SegmentMap::operator()(const Segment& seg) const
{
    if (kind == "kernel") {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(out_dim);
        const double h = seg.spacing;
        for (Index j = 0; j < seg.upper.rows(); ++j) {
            acc += h / 2 * as_operator(kernel.eval(j * h, Side::right), in_dim) * seg.upper.row(j).transpose();
            acc += h / 2 * as_operator(kernel.eval((j + 1) * h, Side::left), in_dim) * seg.lower.row(j).transpose();
        }
        return acc;
    }
    Eigen::VectorXd y = fn(seg);
    if (y.size() != out_dim)
        throw DimensionMismatch("segment map: output has wrong dimension");
    return y;
}

SegmentMap segment_kernel(const Table& kernel, double horizon, Index dim)
{
    require_kernel_table(kernel, horizon, dim);
    SegmentMap m;
    m.kind = "kernel";
    m.in_dim = m.out_dim = dim;
    m.linear = true;
    m.kernel = kernel;
    m.horizon = horizon;
    m.lipschitz = [kernel, horizon, dim](double p) {
        const double q = std::isinf(p) ? 1.0 : p / (p - 1.0);
        const double integral = integrate_table(kernel, horizon, [dim, q](const Eigen::VectorXd& row, double) {
            return std::pow(operator_norm(row, dim), q);
        });
        return std::pow(integral, 1.0 / q);
    };
    return m;
}

SegmentMap segment_custom(std::function<Eigen::VectorXd(const Segment&)> fn, Index in_dim, Index out_dim,
                          double lipschitz, bool linear)
{
    if (!(lipschitz >= 0) || in_dim < 1 || out_dim < 1)
        throw InvalidInput("segment map: bad dimensions or Lipschitz constant");
    SegmentMap m;
    m.kind = "custom";
    m.in_dim = in_dim;
    m.out_dim = out_dim;
    m.linear = linear;
    m.fn = std::move(fn);
    m.lipschitz = [lipschitz](double) { return lipschitz; };
    return m;
}

Expr::Expr(NodeKind kind) : kind_(std::make_shared<const NodeKind>(std::move(kind)))
{
    std::tie(in_dim_, out_dim_) = dims_of(*kind_);
    if (in_dim_ < 1 || out_dim_ < 1)
        throw DimensionMismatch("operator dimensions must be positive");
}

Expr antideriv(Index dim, int order)
{
    if (order < 1)
        throw InvalidInput("antiderivative order must be at least 1");
    return Expr(node::AntiDeriv{dim, order});
}

Expr shift(Index dim, double theta)
{
    if (!std::isfinite(theta))
        throw InvalidInput("shift offset must be finite");
    if (theta > 0)
        throw NonCausalOperator("shift by theta=" + std::to_string(theta) + " > 0 reads the future");
    return Expr(node::Shift{dim, theta});
}

Expr history(double horizon, SegmentMap inner)
{
    if (!(horizon > 0) || !std::isfinite(horizon))
        throw InvalidInput("history horizon must be positive and finite");
    if (inner.kind == "kernel" && std::abs(inner.horizon - horizon) > 1e-12 * horizon)
        throw InvalidInput("history horizon differs from its kernel horizon");
    inner.horizon = horizon;
    return Expr(node::History{horizon, std::move(inner)});
}

Expr kernel_conv(const Table& kernel, double horizon, Index dim)
{
    require_kernel_table(kernel, horizon, dim);
    return Expr(node::Kernel{dim, horizon, kernel});
}

Expr pointwise(PointwiseMap map) { return Expr(node::Pointwise{std::move(map)}); }

Expr coeff_mul(const Table& coeff, Index dim)
{
    if (!table_shape_ok(coeff, dim))
        throw DimensionMismatch("coefficient table has the wrong number of value columns");
    return Expr(node::Coeff{dim, coeff});
}

Expr scale(Index dim, double factor)
{
    if (!std::isfinite(factor))
        throw InvalidInput("scale factor must be finite");
    return Expr(node::Scale{dim, factor});
}

Expr sum(std::vector<Expr> terms, Index in_dim, Index out_dim)
{
    for (const auto& t : terms)
        if (t.in_dim() != in_dim || t.out_dim() != out_dim)
            throw DimensionMismatch("sum: term dimensions differ");
    return Expr(node::Sum{in_dim, out_dim, std::move(terms)});
}

Expr zero(Index in_dim, Index out_dim) { return sum({}, in_dim, out_dim); }

Expr compose(const Expr& outer, const Expr& inner)
{
    if (outer.in_dim() != inner.out_dim())
        throw DimensionMismatch("compose: outer input dimension " + std::to_string(outer.in_dim()) +
                                " != inner output dimension " + std::to_string(inner.out_dim()));
    node::Compose c;
    for (const Expr* part : {&outer, &inner}) {
        if (const auto* nested = std::get_if<node::Compose>(&part->kind()))
            c.chain.insert(c.chain.end(), nested->chain.begin(), nested->chain.end());
        else
            c.chain.push_back(*part);
    }
    return Expr(std::move(c));
}

GridFunction apply(const Expr& expr, const GridFunction& u)
{
    if (u.dim() != expr.in_dim())
        throw DimensionMismatch("apply: input dimension " + std::to_string(u.dim()) + " != operator input " +
                                std::to_string(expr.in_dim()));
    return std::visit(Overloaded{
        [&u](const node::AntiDeriv& a) {
            GridFunction out = antiderivative(u);
            for (int k = 1; k < a.order; ++k)
                out = antiderivative(out);
            return out;
        },
        [&u](const node::Shift& s) { return apply_shift(s, u); },
        [&u](const node::History& h) { return apply_history(h, u); },
        [&u](const node::Kernel& k) { return GridFunction(u.grid(), convolve(k.kernel, k.horizon, k.dim, u)); },
        [&u](const node::Pointwise& p) { return apply_pointwise(p.map, u); },
        [&u](const node::Coeff& c) { return apply_coeff(c, u); },
        [&u](const node::Scale& s) { return s.factor * u; },
        [&u](const node::Sum& s) {
            GridFunction out(u.grid(), s.out_dim);
            for (const auto& t : s.terms)
                out = out + apply(t, u);
            return out;
        },
        [&u](const node::Compose& c) {
            GridFunction out = u;
            for (auto it = c.chain.rbegin(); it != c.chain.rend(); ++it)
                out = apply(*it, out);
            return out;
        },
    }, expr.kind());
}

NormBound norm_bound(const Expr& expr)
{
    return std::visit(Overloaded{
        [](const node::AntiDeriv& a) { return NormBound::inverse_power(a.order); },
        [](const node::Shift& s) { return s.theta == 0 ? NormBound::constant(1) : NormBound::delay(s.theta); },
        [](const node::History& h) {
            return NormBound::history_factor() * NormBound::depends_on_p(h.inner.lipschitz, "L_inner(p)");
        },
        [](const node::Kernel& k) { return NormBound::kernel_weight(k.kernel, k.horizon, k.dim); },
        [](const node::Pointwise& p) { return NormBound::constant(p.map.lipschitz); },
        [](const node::Coeff& c) { return NormBound::constant(coeff_sup(c.coeff, c.dim)); },
        [](const node::Scale& s) { return NormBound::constant(std::abs(s.factor)); },
        [](const node::Sum& s) {
            NormBound total = NormBound::constant(0);
            for (const auto& t : s.terms)
                total = total + norm_bound(t);
            return total;
        },
        [](const node::Compose& c) {
            NormBound total = NormBound::constant(1);
            for (const auto& t : c.chain)
                total = total * norm_bound(t);
            return total;
        },
    }, expr.kind());
}

double lipschitz_bound(const Expr& expr, const Weight& w) { return norm_bound(expr)(w); }

bool is_linear(const Expr& expr)
{
    return std::visit(Overloaded{
        [](const node::History& h) { return h.inner.linear; },
        [](const node::Pointwise& p) { return p.map.linear; },
        [](const node::Sum& s) {
            for (const auto& t : s.terms)
                if (!is_linear(t))
                    return false;
            return true;
        },
        [](const node::Compose& c) {
            for (const auto& t : c.chain)
                if (!is_linear(t))
                    return false;
            return true;
        },
        [](const auto&) { return true; },
    }, expr.kind());
}

bool contains_history(const Expr& expr)
{
    return std::visit(Overloaded{
        [](const node::History&) { return true; },
        [](const node::Sum& s) {
            for (const auto& t : s.terms)
                if (contains_history(t))
                    return true;
            return false;
        },
        [](const node::Compose& c) {
            for (const auto& t : c.chain)
                if (contains_history(t))
                    return true;
            return false;
        },
        [](const auto&) { return false; },
    }, expr.kind());
}

int quadrature_depth(const Expr& expr)
{
    return std::visit(Overloaded{
        [](const node::AntiDeriv& a) { return a.order; },
        [](const node::History&) { return 1; },
        [](const node::Kernel&) { return 1; },
        [](const node::Sum& s) {
            int depth = 0;
            for (const auto& t : s.terms)
                depth = std::max(depth, quadrature_depth(t));
            return depth;
        },
        [](const node::Compose& c) {
            int depth = 0;
            for (const auto& t : c.chain)
                depth += quadrature_depth(t);
            return depth;
        },
        [](const auto&) { return 0; },
    }, expr.kind());
}

std::string describe(const Expr& expr)
{
    std::ostringstream os;
    std::visit(Overloaded{
        [&os](const node::AntiDeriv& a) { os << "AntiDeriv(" << a.order << ")"; },
        [&os](const node::Shift& s) { os << "Shift(" << s.theta << ")"; },
        [&os](const node::History& h) { os << "HistoryMap(" << h.horizon << ", " << h.inner.kind << ")"; },
        [&os](const node::Kernel& k) { os << "KernelConv(" << k.horizon << ")"; },
        [&os](const node::Pointwise& p) { os << "Pointwise(" << p.map.kind << ", L=" << p.map.lipschitz << ")"; },
        [&os](const node::Coeff&) { os << "CoeffMul"; },
        [&os](const node::Scale& s) { os << "Scale(" << s.factor << ")"; },
        [&os](const node::Sum& s) {
            if (s.terms.empty()) {
                os << "0";
                return;
            }
            os << "(";
            for (std::size_t i = 0; i < s.terms.size(); ++i)
                os << (i ? " + " : "") << describe(s.terms[i]);
            os << ")";
        },
        [&os](const node::Compose& c) {
            for (std::size_t i = 0; i < c.chain.size(); ++i)
                os << (i ? " o " : "") << describe(c.chain[i]);
        },
    }, expr.kind());
    return os.str();
}

double empirical_operator_norm(const Expr& expr, const Weight& w, const Grid& grid, int trials,
                               std::uint64_t seed)
{
    if (!is_linear(expr))
        throw InvalidInput("empirical operator norm needs a linear expression");
    const Index d = expr.in_dim();
    const Index n = grid.count();
    const double nu = w.nu();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;

    double best = 0;
    auto probe = [&](const GridFunction& u) {
        const double base = weighted_norm(u, w);
        if (!(base > 0) || !std::isfinite(base))
            return;
        const double ratio = weighted_norm(apply(expr, u), w) / base;
        if (std::isfinite(ratio))
            best = std::max(best, ratio);
    };
    auto growth = [&](Index i) { return std::exp(nu * (grid.node(i) - grid.t_start())); };
    auto direction = [&] {
        Eigen::VectorXd v(d);
        for (Index c = 0; c < d; ++c)
            v(c) = normal(rng);
        const double len = v.norm();
        return len > 0 ? Eigen::VectorXd(v / len) : Eigen::VectorXd(Eigen::VectorXd::Unit(d, 0));
    };

    for (int trial = 0; trial < trials; ++trial) {
        Eigen::MatrixXd noise(n, d);
        Eigen::MatrixXd walk(n, d);
        Eigen::RowVectorXd pos = Eigen::RowVectorXd::Zero(d);
        for (Index i = 0; i < n; ++i) {
            for (Index c = 0; c < d; ++c) {
                noise(i, c) = normal(rng) * growth(i);
                pos(c) += normal(rng) * std::sqrt(grid.step());
            }
            walk.row(i) = pos * growth(i);
        }
        probe(GridFunction(grid, noise));
        probe(GridFunction(grid, walk));
    }

    // e^{nu t} indicator[a, b) over node-aligned intervals.
    const Index cells = n - 1;
    const Index starts[] = {0, cells / 8, cells / 4, cells / 2};
    const Index lengths[] = {1, cells / 16, cells / 8, cells / 4, cells / 2, cells};
    for (Index a : starts) {
        for (Index len : lengths) {
            const Index b = std::min(a + std::max<Index>(len, 1), cells);
            if (b <= a)
                continue;
            const Eigen::VectorXd dir = direction();
            GridFunction box = indicator<double>(grid, grid.node(a), grid.node(b), dir);
            Eigen::MatrixXd values = box.values();
            Eigen::MatrixXd left = box.left();
            for (Index i = 0; i < n; ++i) {
                values.row(i) *= growth(i);
                left.row(i) *= growth(i);
            }
            probe(GridFunction(grid, std::move(values), std::move(left)));
        }
    }
    return best;
}

} // namespace nudde
