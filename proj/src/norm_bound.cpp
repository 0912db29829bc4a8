#include <nudde/norm_bound.hpp>

#include <cmath>
#include <sstream>
#include <variant>

namespace nudde {

namespace bound_terms {

struct Constant { double value; };
struct Delay { double theta; };
struct InversePower { int m; };
struct HistoryFactor {};
struct KernelWeight { Table kernel; double horizon; Index dim; };
struct PDependent { std::function<double(double)> of_p; std::string label; };
struct Sum { std::vector<NormBound> terms; };
struct Product { std::vector<NormBound> factors; };

} // namespace bound_terms

using namespace bound_terms;

struct NormBound::Node {
    std::variant<Constant, Delay, InversePower, HistoryFactor, KernelWeight, PDependent, Sum, Product> kind;
};

NormBound NormBound::constant(double c)
{
    if (!(c >= 0) || !std::isfinite(c))
        throw InvalidInput("norm bound: constants must be finite and nonnegative");
    return NormBound(std::make_shared<const Node>(Node{Constant{c}}));
}

NormBound NormBound::delay(double theta)
{
    return NormBound(std::make_shared<const Node>(Node{Delay{theta}}));
}

NormBound NormBound::inverse_power(int m)
{
    return NormBound(std::make_shared<const Node>(Node{InversePower{m}}));
}

NormBound NormBound::history_factor()
{
    return NormBound(std::make_shared<const Node>(Node{HistoryFactor{}}));
}

NormBound NormBound::kernel_weight(const Table& kernel, double horizon, Index dim)
{
    return NormBound(std::make_shared<const Node>(Node{KernelWeight{kernel, horizon, dim}}));
}

NormBound NormBound::depends_on_p(std::function<double(double)> of_p, std::string label)
{
    return NormBound(std::make_shared<const Node>(Node{PDependent{std::move(of_p), std::move(label)}}));
}

namespace {

const Constant* as_constant(const NormBound::Node& n) { return std::get_if<Constant>(&n.kind); }

template <class... Ts>
struct Overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

} // namespace

NormBound operator+(const NormBound& a, const NormBound& b)
{
    const auto* ca = as_constant(*a.node_);
    const auto* cb = as_constant(*b.node_);
    if (ca && cb)
        return NormBound::constant(ca->value + cb->value);
    if (ca && ca->value == 0)
        return b;
    if (cb && cb->value == 0)
        return a;
    Sum sum;
    for (const NormBound* part : {&a, &b}) {
        if (const auto* s = std::get_if<Sum>(&part->node_->kind))
            sum.terms.insert(sum.terms.end(), s->terms.begin(), s->terms.end());
        else
            sum.terms.push_back(*part);
    }
    return NormBound(std::make_shared<const NormBound::Node>(NormBound::Node{std::move(sum)}));
}

NormBound operator*(const NormBound& a, const NormBound& b)
{
    const auto* ca = as_constant(*a.node_);
    const auto* cb = as_constant(*b.node_);
    if (ca && cb)
        return NormBound::constant(ca->value * cb->value);
    if ((ca && ca->value == 0) || (cb && cb->value == 0))
        return NormBound::constant(0);
    if (ca && ca->value == 1)
        return b;
    if (cb && cb->value == 1)
        return a;
    Product prod;
    for (const NormBound* part : {&a, &b}) {
        if (const auto* s = std::get_if<Product>(&part->node_->kind))
            prod.factors.insert(prod.factors.end(), s->factors.begin(), s->factors.end());
        else
            prod.factors.push_back(*part);
    }
    return NormBound(std::make_shared<const NormBound::Node>(NormBound::Node{std::move(prod)}));
}

double NormBound::operator()(const Weight& w) const
{
    const double nu = w.nu();
    return std::visit(Overloaded{
        [](const Constant& c) { return c.value; },
        [nu](const Delay& d) { return std::exp(nu * d.theta); },
        [nu](const InversePower& m) { return std::pow(nu, -m.m); },
        [&w, nu](const HistoryFactor&) { return w.is_sup() ? 1.0 : std::pow(w.p() * nu, -1.0 / w.p()); },
        [nu](const KernelWeight& k) { return weighted_kernel_integral(k.kernel, k.horizon, k.dim, nu); },
        [&w](const PDependent& f) { return f.of_p(w.p()); },
        [&w](const Sum& s) {
            double total = 0;
            for (const auto& t : s.terms)
                total += t(w);
            return total;
        },
        [&w](const Product& s) {
            double total = 1;
            for (const auto& t : s.factors)
                total *= t(w);
            return total;
        },
    }, node_->kind);
}

std::string NormBound::to_string() const
{
    std::ostringstream os;
    std::visit(Overloaded{
        [&os](const Constant& c) { os << c.value; },
        [&os](const Delay& d) { os << "exp(" << d.theta << "*nu)"; },
        [&os](const InversePower& m) { os << "nu^-" << m.m; },
        [&os](const HistoryFactor&) { os << "(p*nu)^(-1/p)"; },
        [&os](const KernelWeight& k) { os << "int_0^" << k.horizon << " |B(s)|exp(-nu*s)ds"; },
        [&os](const PDependent& f) { os << f.label; },
        [&os](const Sum& s) {
            os << "(";
            for (std::size_t i = 0; i < s.terms.size(); ++i)
                os << (i ? " + " : "") << s.terms[i].to_string();
            os << ")";
        },
        [&os](const Product& s) {
            for (std::size_t i = 0; i < s.factors.size(); ++i)
                os << (i ? "*" : "") << s.factors[i].to_string();
        },
    }, node_->kind);
    return os.str();
}

bool NormBound::contains_history_factor() const
{
    return std::visit(Overloaded{
        [](const HistoryFactor&) { return true; },
        [](const Sum& s) {
            for (const auto& t : s.terms)
                if (t.contains_history_factor())
                    return true;
            return false;
        },
        [](const Product& s) {
            for (const auto& t : s.factors)
                if (t.contains_history_factor())
                    return true;
            return false;
        },
        [](const auto&) { return false; },
    }, node_->kind);
}

double integrate_table(const Table& table, double horizon,
                       const std::function<double(const Eigen::VectorXd&, double)>& integrand)
{
    // Composite Simpson on every table cell inside [0, horizon]; the integrand
    // is smooth between table times.
    Eigen::VectorXd cuts(table.rows() + 2);
    Index n = 0;
    cuts(n++) = 0.0;
    for (Index i = 0; i < table.rows(); ++i) {
        const double t = table.times()(i);
        if (t > cuts(n - 1) && t < horizon)
            cuts(n++) = t;
    }
    cuts(n++) = horizon;
    constexpr int sub = 256;
    double total = 0;
    for (Index c = 0; c + 1 < n; ++c) {
        const double a = cuts(c);
        const double b = cuts(c + 1);
        const double h = (b - a) / sub;
        double acc = integrand(table.eval(a, Side::right), a) + integrand(table.eval(b, Side::left), b);
        for (int j = 1; j < sub; ++j)
            acc += (j % 2 ? 4.0 : 2.0) * integrand(table.eval(a + j * h), a + j * h);
        total += acc * h / 3.0;
    }
    return total;
}

double weighted_kernel_integral(const Table& kernel, double horizon, Index dim, double nu)
{
    return integrate_table(kernel, horizon, [dim, nu](const Eigen::VectorXd& row, double s) {
        return operator_norm(row, dim) * std::exp(-nu * s);
    });
}

} // namespace nudde
