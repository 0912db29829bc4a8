#include <nudde/demos.hpp>

#include <nudde/spec_io.hpp>
#include <nudde/verify.hpp>

#include <cmath>

namespace nudde {

using nlohmann::json;

namespace {

json grid_json(double t_start, double t_end, double h) { return {{"t_start", t_start}, {"t_end", t_end}, {"h", h}}; }

json constant_table(double t0, double t1, double value) { return {{"times", {t0, t1}}, {"values", {value, value}}}; }

json dirac_json(double t, json amplitude) { return {{"dirac", {{"t", t}, {"amplitude", amplitude}}}}; }

json op_shift(double theta) { return {{"op", "shift"}, {"theta", theta}}; }
json op_scale(double a) { return {{"op", "scale"}, {"factor", a}}; }
json op_compose(json chain) { return {{"op", "compose"}, {"chain", chain}}; }
json op_linear(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(row);
    }
    return {{"op", "pointwise"}, {"map", {{"kind", "linear"}, {"matrix", rows}}}};
}

json base(Index dim, double p)
{
    json spec;
    spec["dim"] = dim;
    if (std::isinf(p)) {
        spec["mode"] = "sup";
    } else {
        spec["mode"] = "lp";
        spec["p"] = p;
    }
    spec["solver"] = {{"target_contraction", 0.5}, {"tol", 1e-10}, {"max_iter", 1000}};
    return spec;
}

json exponential_ivp()
{
    json s = base(1, 2);
    s["grid"] = grid_json(-0.25, 3, 1e-3);
    s["rhs"] = op_scale(1);
    s["forcing"] = json::array({dirac_json(0, 1.0)});
    return s;
}

// x' = -x(t - 1), x = 1 on [-1, 0]: the history enters as a unit jump at -1.
json delay_linear()
{
    json s = base(1, 2);
    s["grid"] = grid_json(-1, 4, 1e-3);
    s["rhs"] = op_compose({op_scale(-1), op_shift(-1)});
    s["forcing"] = json::array({dirac_json(-1, 1.0)});
    return s;
}

// x = antideriv^2(p1 x(t - 0.5)) + p0 x(t - 1) + antideriv^2(delta_0)
json das_neutral()
{
    json s = base(1, 2);
    s["grid"] = grid_json(0, 4, 2e-3);
    s["form"] = "fixed_point";
    s["forcing_order"] = 2;
    json p1 = {{"op", "coeff"}, {"table", constant_table(0, 4, -1.0)}};
    json delayed = op_compose({{{"op", "antideriv"}, {"order", 2}}, p1, op_shift(-0.5)});
    json direct = op_compose({op_scale(0.5), op_shift(-1)});
    s["rhs"] = {{"op", "sum"}, {"terms", {delayed, direct}}};
    s["forcing"] = json::array({dirac_json(0, 1.0)});
    return s;
}

// u' = A1 u(t - 1) + A2 u(t - 2) + int_0^3 0.2 e^{-s} u(t - s) ds
json corduneanu()
{
    json s = base(2, 2);
    s["grid"] = grid_json(0, 6, 5e-3);
    Eigen::MatrixXd a1(2, 2);
    a1 << -0.5, 0.1, 0.0, -0.3;
    Eigen::MatrixXd a2(2, 2);
    a2 << 0.0, -0.2, 0.1, 0.0;
    json times = json::array();
    json values = json::array();
    for (int i = 0; i <= 60; ++i) {
        const double t = 0.05 * i;
        times.push_back(t);
        values.push_back(0.2 * std::exp(-t));
    }
    json kernel = {{"op", "kernel"}, {"horizon", 3.0}, {"kernel", {{"times", times}, {"values", values}}}};
    s["rhs"] = {{"op", "sum"},
                {"terms", {op_compose({op_linear(a1), op_shift(-1)}), op_compose({op_linear(a2), op_shift(-2)}), kernel}}};
    s["forcing"] = json::array({dirac_json(0, json::array({1.0, 0.5}))});
    return s;
}

// u' = -1_{t >= 0} tanh(int_0^1 u(t - s) ds), u = 1 on [-1, 0]
json continuous_delay()
{
    json s = base(1, 2);
    s["grid"] = grid_json(-1, 5, 4e-3);
    json hist = {{"op", "history"},
                 {"horizon", 1.0},
                 {"inner", {{"kind", "kernel"}, {"kernel", constant_table(0, 1, 1.0)}}}};
    json tanh = {{"op", "pointwise"}, {"map", {{"kind", "tanh"}, {"scale", -1.0}}}};
    json cut = {{"op", "coeff"}, {"table", constant_table(0, 5, 1.0)}};
    s["rhs"] = op_compose({cut, tanh, hist});
    s["forcing"] = json::array({dirac_json(-1, 1.0)});
    return s;
}

// u' = u'(t - 1) / 2 + 1_{t >= 0}
json neutral_first_order()
{
    json s = base(1, 2);
    s["grid"] = grid_json(0, 4, 1e-3);
    s["neutral"] = true;
    json select = {{"op", "pointwise"}, {"map", {{"kind", "select"}, {"first", 1}, {"count", 1}}}};
    s["rhs"] = op_compose({op_scale(0.5), op_shift(-1), select});
    s["forcing"] = json::array({{{"grid", constant_table(0, 4, 1.0)}}});
    return s;
}

json cantor_forcing()
{
    json s = base(1, std::numeric_limits<double>::infinity());
    const double h = 1.0 / 729;
    s["grid"] = grid_json(0, 1, h);
    s["rhs"] = {{"op", "sum"}, {"terms", json::array()}, {"out_dim", 1}};
    json times = json::array();
    json values = json::array();
    for (int i = 0; i <= 729; ++i) {
        const double t = 0.0 + static_cast<double>(i) * h;
        times.push_back(t);
        values.push_back(cantor(t));
    }
    s["forcing"] = json::array({{{"cdf", {{"times", times}, {"values", values}}}}});
    return s;
}

// S' = TS - ST, S(0) = K, in row-major vec form.
json commutator_flow()
{
    json s = base(4, std::numeric_limits<double>::infinity());
    s["grid"] = grid_json(0, 2, 1e-3);
    Eigen::Matrix2d T;
    T << 0, 1, 0, 0;
    Eigen::Matrix2d K;
    K << 0, 0, 1, 0;
    s["rhs"] = op_linear(commutator_matrix(T));
    const Eigen::Vector4d k = vec_row_major(K);
    s["forcing"] = json::array({dirac_json(0, json::array({k(0), k(1), k(2), k(3)}))});
    return s;
}

} // namespace

std::vector<std::string> demo_names()
{
    return {"exponential-ivp",  "delay-linear",        "das-neutral-order-n", "corduneanu-series-kernel",
            "continuous-delay", "neutral-first-order", "cantor-forcing",      "commutator-flow"};
}

json demo_spec(const std::string& name)
{
    if (name == "exponential-ivp")
        return exponential_ivp();
    if (name == "delay-linear")
        return delay_linear();
    if (name == "das-neutral-order-n")
        return das_neutral();
    if (name == "corduneanu-series-kernel")
        return corduneanu();
    if (name == "continuous-delay")
        return continuous_delay();
    if (name == "neutral-first-order")
        return neutral_first_order();
    if (name == "cantor-forcing")
        return cantor_forcing();
    if (name == "commutator-flow")
        return commutator_flow();
    std::string known;
    for (const auto& n : demo_names())
        known += (known.empty() ? "" : ", ") + n;
    throw InvalidInput("unknown demo '" + name + "'; available: " + known);
}

Problem demo_problem(const std::string& name) { return parse_problem(demo_spec(name)); }

} // namespace nudde
