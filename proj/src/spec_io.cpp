#include <nudde/spec_io.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace nudde {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class... Ts>
struct Overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!j.is_object())
        throw InvalidInput(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        if (!ok.count(key))
            throw InvalidInput(where + ": unknown key '" + key + "'");
}

const json& require(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key))
        throw InvalidInput(where + ": missing key '" + key + "'");
    return j.at(key);
}

double number(const json& j, const char* key, const std::string& where)
{
    const json& v = require(j, key, where);
    if (!v.is_number())
        throw InvalidInput(where + ": '" + key + "' must be a number");
    return v.get<double>();
}

Index integer(const json& j, const char* key, const std::string& where)
{
    const json& v = require(j, key, where);
    if (!v.is_number_integer())
        throw InvalidInput(where + ": '" + key + "' must be an integer");
    return v.get<Index>();
}

Eigen::VectorXd vector_of(const json& v, const std::string& where)
{
    if (v.is_number())
        return Eigen::VectorXd::Constant(1, v.get<double>());
    if (!v.is_array() || v.empty())
        throw InvalidInput(where + ": expected a number or a nonempty array of numbers");
    Eigen::VectorXd out(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number())
            throw InvalidInput(where + ": expected numbers");
        out(static_cast<Index>(i)) = v[i].get<double>();
    }
    return out;
}

json vector_json(const Eigen::VectorXd& v)
{
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i)
        out.push_back(v(i));
    return out;
}

Eigen::MatrixXd matrix_of(const json& v, const std::string& where)
{
    if (!v.is_array() || v.empty())
        throw InvalidInput(where + ": matrix must be a nonempty array of rows");
    const Index rows = static_cast<Index>(v.size());
    Eigen::MatrixXd m;
    for (Index r = 0; r < rows; ++r) {
        const Eigen::VectorXd row = vector_of(v[static_cast<std::size_t>(r)], where);
        if (r == 0)
            m.resize(rows, row.size());
        else if (row.size() != m.cols())
            throw InvalidInput(where + ": ragged matrix");
        m.row(r) = row.transpose();
    }
    return m;
}

json matrix_json(const Eigen::MatrixXd& m)
{
    json out = json::array();
    for (Index r = 0; r < m.rows(); ++r)
        out.push_back(vector_json(m.row(r).transpose()));
    return out;
}

PointwiseMap parse_map_kind(const json& j, Index in_dim)
{
    const std::string where = "pointwise map";
    const json& kind_node = require(j, "kind", where);
    if (!kind_node.is_string())
        throw InvalidInput(where + ": 'kind' must be a string");
    const std::string kind = kind_node.get<std::string>();
    if (kind == "linear") {
        check_keys(j, {"kind", "matrix", "lipschitz"}, where);
        Eigen::MatrixXd m = matrix_of(require(j, "matrix", where), where);
        if (m.cols() != in_dim)
            throw DimensionMismatch(where + ": matrix has " + std::to_string(m.cols()) + " columns, input is " +
                                    std::to_string(in_dim));
        return linear_map(std::move(m));
    }
    if (kind == "tanh" || kind == "sin") {
        check_keys(j, {"kind", "scale", "lipschitz"}, where);
        return componentwise(kind, in_dim, j.contains("scale") ? number(j, "scale", where) : 1.0);
    }
    if (kind == "select") {
        check_keys(j, {"kind", "first", "count", "lipschitz"}, where);
        return select_components(in_dim, integer(j, "first", where), integer(j, "count", where));
    }
    throw InvalidInput(where + ": unknown kind '" + kind + "'");
}

// An optional "lipschitz" entry replaces the computed constant.
PointwiseMap parse_map(const json& j, Index in_dim)
{
    PointwiseMap m = parse_map_kind(j, in_dim);
    if (j.contains("lipschitz")) {
        const double lip = number(j, "lipschitz", "pointwise map");
        if (!(lip >= 0) || !std::isfinite(lip))
            throw InvalidInput("pointwise map: lipschitz must be finite and nonnegative");
        m.lipschitz = lip;
    }
    return m;
}

json map_kind_json(const PointwiseMap& m)
{
    if (m.kind == "linear")
        return {{"kind", "linear"}, {"matrix", matrix_json(m.matrix)}};
    if (m.kind == "tanh" || m.kind == "sin")
        return {{"kind", m.kind}, {"scale", m.scale}};
    if (m.kind == "select") {
        Index first = 0;
        m.matrix.row(0).maxCoeff(&first);
        return {{"kind", "select"}, {"first", first}, {"count", m.out_dim}};
    }
    throw InvalidInput("custom pointwise maps cannot be serialized");
}

json map_json(const PointwiseMap& m)
{
    json out = map_kind_json(m);
    const PointwiseMap computed = parse_map_kind(out, m.in_dim);
    if (computed.lipschitz != m.lipschitz)
        out["lipschitz"] = m.lipschitz;
    return out;
}

ForcingTerm parse_forcing_term(const json& j, Index dim, const fs::path& base)
{
    const std::string where = "forcing";
    if (!j.is_object() || j.size() != 1)
        throw InvalidInput(where + ": each term is an object with exactly one of grid, dirac, cdf");
    if (j.contains("grid"))
        return GridForcing{parse_table(j.at("grid"), base)};
    if (j.contains("cdf"))
        return CdfForcing{parse_table(j.at("cdf"), base)};
    if (j.contains("dirac")) {
        const json& d = j.at("dirac");
        check_keys(d, {"t", "amplitude"}, "dirac");
        Eigen::VectorXd amp = vector_of(require(d, "amplitude", "dirac"), "dirac amplitude");
        if (amp.size() == 1 && dim > 1)
            amp = Eigen::VectorXd::Constant(dim, amp(0));
        return std::get<DiracForcing>(dirac(number(d, "t", "dirac"), std::move(amp)).terms.front());
    }
    throw InvalidInput(where + ": unknown term '" + j.begin().key() + "'");
}

json forcing_json(const Forcing& g)
{
    json out = json::array();
    for (const auto& term : g.terms) {
        out.push_back(std::visit(Overloaded{
            [](const GridForcing& f) { return json{{"grid", to_json(f.table)}}; },
            [](const DiracForcing& d) {
                return json{{"dirac", {{"t", d.time}, {"amplitude", vector_json(d.amplitude)}}}};
            },
            [](const CdfForcing& c) { return json{{"cdf", to_json(c.cdf)}}; },
        }, term));
    }
    return out;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    return out;
}

bool parse_double(const std::string& s, double& out)
{
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin)
        return false;
    while (*end == ' ' || *end == '\t' || *end == '\r')
        ++end;
    return *end == '\0';
}

} // namespace

std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Table read_table_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot read csv '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r")
            continue;
        const auto cells = split(line);
        std::vector<double> row;
        bool numeric = true;
        for (const auto& c : cells) {
            double v = 0;
            if (!parse_double(c, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (rows.empty() && lineno == 1)
                continue;
            throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": non-numeric cell");
        }
        if (row.size() < 2)
            throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": need a time and a value");
        if (!rows.empty() && row.size() != rows.front().size())
            throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw InvalidInput("csv '" + path.string() + "' has no data rows");
    const auto n = static_cast<Index>(rows.size());
    const auto k = static_cast<Index>(rows.front().size()) - 1;
    Eigen::VectorXd times(n);
    Eigen::MatrixXd values(n, k);
    for (Index i = 0; i < n; ++i) {
        times(i) = rows[static_cast<std::size_t>(i)][0];
        for (Index c = 0; c < k; ++c)
            values(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c + 1)];
    }
    return Table(std::move(times), std::move(values));
}

Table parse_table(const json& node, const fs::path& base)
{
    if (node.is_string())
        return read_table_csv(base / node.get<std::string>());
    const std::string where = "table";
    if (node.is_object() && node.contains("csv")) {
        check_keys(node, {"csv"}, where);
        const json& p = node.at("csv");
        if (!p.is_string())
            throw InvalidInput(where + ": 'csv' must be a path");
        return read_table_csv(base / p.get<std::string>());
    }
    check_keys(node, {"times", "values"}, where);
    const Eigen::VectorXd times = vector_of(require(node, "times", where), "table times");
    const json& v = require(node, "values", where);
    Eigen::MatrixXd values;
    if (v.is_array() && !v.empty() && v.front().is_number())
        values = vector_of(v, "table values");
    else
        values = matrix_of(v, "table values");
    if (values.rows() != times.size())
        throw InvalidInput(where + ": times and values differ in length");
    return Table(times, values);
}

json to_json(const Table& table)
{
    return {{"times", vector_json(table.times())}, {"values", matrix_json(table.values())}};
}

Expr parse_expr(const json& node, Index in_dim, const fs::path& base)
{
    if (!node.is_object())
        throw InvalidInput("rhs: every node is an object with an 'op'");
    const json& op_node = require(node, "op", "rhs node");
    if (!op_node.is_string())
        throw InvalidInput("rhs node: 'op' must be a string");
    const std::string op = op_node.get<std::string>();
    const std::string where = "rhs node '" + op + "'";
    if (op == "shift") {
        check_keys(node, {"op", "theta"}, where);
        return shift(in_dim, number(node, "theta", where));
    }
    if (op == "antideriv") {
        check_keys(node, {"op", "order"}, where);
        return antideriv(in_dim, node.contains("order") ? static_cast<int>(integer(node, "order", where)) : 1);
    }
    if (op == "scale") {
        check_keys(node, {"op", "factor"}, where);
        return scale(in_dim, number(node, "factor", where));
    }
    if (op == "history") {
        check_keys(node, {"op", "horizon", "inner"}, where);
        const double horizon = number(node, "horizon", where);
        const json& inner = require(node, "inner", where);
        check_keys(inner, {"kind", "kernel"}, "history inner map");
        if (require(inner, "kind", "history inner map") != "kernel")
            throw InvalidInput("history inner map: only kind 'kernel' can be specified in a file");
        return history(horizon, segment_kernel(parse_table(require(inner, "kernel", "history inner map"), base),
                                               horizon, in_dim));
    }
    if (op == "kernel") {
        check_keys(node, {"op", "horizon", "kernel"}, where);
        return kernel_conv(parse_table(require(node, "kernel", where), base), number(node, "horizon", where), in_dim);
    }
    if (op == "pointwise") {
        check_keys(node, {"op", "map"}, where);
        return pointwise(parse_map(require(node, "map", where), in_dim));
    }
    if (op == "coeff") {
        check_keys(node, {"op", "table"}, where);
        return coeff_mul(parse_table(require(node, "table", where), base), in_dim);
    }
    if (op == "sum") {
        check_keys(node, {"op", "terms", "out_dim"}, where);
        const json& terms = require(node, "terms", where);
        if (!terms.is_array())
            throw InvalidInput(where + ": 'terms' must be an array");
        std::vector<Expr> parsed;
        for (const auto& t : terms)
            parsed.push_back(parse_expr(t, in_dim, base));
        Index out = node.contains("out_dim") ? integer(node, "out_dim", where)
                                             : (parsed.empty() ? in_dim : parsed.front().out_dim());
        return sum(std::move(parsed), in_dim, out);
    }
    if (op == "compose") {
        check_keys(node, {"op", "chain"}, where);
        const json& chain = require(node, "chain", where);
        if (!chain.is_array() || chain.empty())
            throw InvalidInput(where + ": 'chain' must be a nonempty array, outermost first");
        std::optional<Expr> acc;
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            Expr e = parse_expr(*it, acc ? acc->out_dim() : in_dim, base);
            acc = acc ? compose(e, *acc) : e;
        }
        return *acc;
    }
    throw InvalidInput("rhs: unknown op '" + op + "'");
}

json to_json(const Expr& expr)
{
    return std::visit(Overloaded{
        [](const node::AntiDeriv& a) { return json{{"op", "antideriv"}, {"order", a.order}}; },
        [](const node::Shift& s) { return json{{"op", "shift"}, {"theta", s.theta}}; },
        [](const node::Scale& s) { return json{{"op", "scale"}, {"factor", s.factor}}; },
        [](const node::History& h) {
            if (h.inner.kind != "kernel")
                throw InvalidInput("custom history maps cannot be serialized");
            return json{{"op", "history"},
                        {"horizon", h.horizon},
                        {"inner", {{"kind", "kernel"}, {"kernel", to_json(h.inner.kernel)}}}};
        },
        [](const node::Kernel& k) {
            return json{{"op", "kernel"}, {"horizon", k.horizon}, {"kernel", to_json(k.kernel)}};
        },
        [](const node::Pointwise& p) { return json{{"op", "pointwise"}, {"map", map_json(p.map)}}; },
        [](const node::Coeff& c) { return json{{"op", "coeff"}, {"table", to_json(c.coeff)}}; },
        [](const node::Sum& s) {
            json terms = json::array();
            for (const auto& t : s.terms)
                terms.push_back(to_json(t));
            return json{{"op", "sum"}, {"terms", terms}, {"out_dim", s.out_dim}};
        },
        [](const node::Compose& c) {
            json chain = json::array();
            for (const auto& t : c.chain)
                chain.push_back(to_json(t));
            return json{{"op", "compose"}, {"chain", chain}};
        },
    }, expr.kind());
}

Problem parse_problem(const json& spec, const fs::path& base)
{
    try {
        check_keys(spec, {"dim", "mode", "p", "grid", "rhs", "forcing", "solver", "neutral", "form", "forcing_order"},
                   "spec");
        const Index dim = integer(spec, "dim", "spec");
        if (dim < 1)
            throw InvalidInput("spec: dim must be positive");

        const json& mode = require(spec, "mode", "spec");
        double p = 0;
        if (mode == "sup") {
            if (spec.contains("p"))
                throw InvalidInput("spec: 'p' is only allowed with mode 'lp'");
            p = std::numeric_limits<double>::infinity();
        } else if (mode == "lp") {
            p = number(spec, "p", "spec");
            if (!(p > 1) || !std::isfinite(p))
                throw InvalidInput("spec: p must be finite and > 1 in mode 'lp'");
        } else {
            throw InvalidInput("spec: mode must be 'lp' or 'sup'");
        }

        const json& g = require(spec, "grid", "spec");
        check_keys(g, {"t_start", "t_end", "h"}, "grid");
        const Grid grid = Grid::from_span(number(g, "t_start", "grid"), number(g, "t_end", "grid"),
                                          number(g, "h", "grid"));

        Formulation form = Formulation::derivative;
        if (spec.contains("form")) {
            if (!spec.at("form").is_string())
                throw InvalidInput("spec: 'form' must be a string");
            form = formulation_from_string(spec.at("form").get<std::string>());
        }
        if (spec.contains("neutral")) {
            if (!spec.at("neutral").is_boolean())
                throw InvalidInput("spec: 'neutral' must be a boolean");
            const bool neutral = spec.at("neutral").get<bool>();
            if (neutral && spec.contains("form") && form != Formulation::neutral)
                throw InvalidInput("spec: 'neutral' contradicts 'form'");
            if (!neutral && form == Formulation::neutral)
                throw InvalidInput("spec: 'neutral' contradicts 'form'");
            if (neutral)
                form = Formulation::neutral;
        }
        int forcing_order = 1;
        if (spec.contains("forcing_order")) {
            if (form != Formulation::fixed_point)
                throw InvalidInput("spec: 'forcing_order' needs form 'fixed_point'");
            forcing_order = static_cast<int>(integer(spec, "forcing_order", "spec"));
        }

        const Index in_dim = form == Formulation::neutral ? 2 * dim : dim;
        Expr rhs = parse_expr(require(spec, "rhs", "spec"), in_dim, base);

        Forcing forcing;
        if (spec.contains("forcing")) {
            const json& f = spec.at("forcing");
            if (f.is_array()) {
                for (const auto& term : f)
                    forcing.terms.push_back(parse_forcing_term(term, dim, base));
            } else {
                forcing.terms.push_back(parse_forcing_term(f, dim, base));
            }
        }

        SolverSettings settings;
        if (spec.contains("solver")) {
            const json& s = spec.at("solver");
            check_keys(s, {"target_contraction", "tol", "max_iter", "nu"}, "solver");
            if (s.contains("target_contraction"))
                settings.target_contraction = number(s, "target_contraction", "solver");
            if (s.contains("tol"))
                settings.tol = number(s, "tol", "solver");
            if (s.contains("max_iter"))
                settings.max_iter = static_cast<int>(integer(s, "max_iter", "solver"));
            if (s.contains("nu") && !s.at("nu").is_null())
                settings.nu = number(s, "nu", "solver");
        }

        Problem prob{std::move(rhs), std::move(forcing), dim, p, grid, form, forcing_order, settings};
        prob.validate();
        return prob;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("spec: ") + e.what());
    }
}

Problem load_problem(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot read spec '" + path.string() + "'");
    json spec;
    try {
        spec = json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidInput("spec '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_problem(spec, path.parent_path());
}

json to_json(const Problem& prob)
{
    json out;
    out["dim"] = prob.dim;
    if (std::isinf(prob.p)) {
        out["mode"] = "sup";
    } else {
        out["mode"] = "lp";
        out["p"] = prob.p;
    }
    out["grid"] = {{"t_start", prob.grid.t_start()}, {"t_end", prob.grid.t_end()}, {"h", prob.grid.step()}};
    out["rhs"] = to_json(prob.rhs);
    out["forcing"] = forcing_json(prob.forcing);
    json solver = {{"target_contraction", prob.solver.target_contraction},
                   {"tol", prob.solver.tol},
                   {"max_iter", prob.solver.max_iter}};
    if (prob.solver.nu)
        solver["nu"] = *prob.solver.nu;
    out["solver"] = solver;
    out["neutral"] = prob.form == Formulation::neutral;
    out["form"] = to_string(prob.form);
    if (prob.form == Formulation::fixed_point)
        out["forcing_order"] = prob.forcing_order;
    return out;
}

void write_solution_csv(std::ostream& out, const GridFunction& u)
{
    out << "t";
    for (Index c = 0; c < u.dim(); ++c)
        out << ",u" << (c + 1);
    out << '\n';
    for (Index i = 0; i < u.size(); ++i) {
        out << format_double(u.grid().node(i));
        for (Index c = 0; c < u.dim(); ++c)
            out << ',' << format_double(u.values()(i, c));
        out << '\n';
    }
}

json report_json(const SolveReport& r)
{
    json out;
    out["schema"] = 1;
    out["nu_used"] = r.nu_used;
    out["lip_at_nu"] = r.lip_at_nu;
    out["iterations"] = r.trace.iterations;
    out["certified_error"] = r.certified_error;
    out["quadrature_tolerance"] = r.quadrature_tolerance;
    out["termination"] = to_string(r.trace.termination);
    out["form"] = to_string(r.form);
    out["mode"] = std::isinf(r.p) ? "sup" : "lp";
    if (!std::isinf(r.p))
        out["p"] = r.p;
    out["distances"] = r.trace.distances;
    return out;
}

} // namespace nudde
