#include <nudde/forcing.hpp>

#include <nudde/operators.hpp>

#include <limits>

namespace nudde {

namespace {

template <class... Ts>
struct Overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Broadcasts a 1-column table to dim components.
GridFunction table_on(const Table& table, const Grid& grid, Index dim, const char* what)
{
    if (table.columns() != 1 && table.columns() != dim)
        throw DimensionMismatch(std::string(what) + " table needs 1 or d value columns");
    if (table.last_time() < grid.t_end() - 1e-9 * grid.step())
        throw InvalidInput(std::string(what) + " table ends before the grid end");
    GridFunction f = table.on_grid(grid);
    if (table.columns() == dim)
        return f;
    return {grid, f.values().replicate(1, dim), f.left().replicate(1, dim)};
}

GridFunction dirac_on(const DiracForcing& d, const Grid& grid, Index dim)
{
    if (d.amplitude.size() != dim)
        throw DimensionMismatch("dirac amplitude has the wrong dimension");
    if (!grid.covers(d.time))
        throw InvalidInput("dirac time " + std::to_string(d.time) + " lies outside the grid");
    return heaviside<double>(grid, d.time, d.amplitude);
}

// Start of the support of a table: values vanish up to the knot before the
// first nonzero row.
double table_support(const Table& t)
{
    for (Index i = 0; i < t.rows(); ++i)
        if (!t.values().row(i).isZero(0))
            return t.times()(i > 0 ? i - 1 : 0);
    return std::numeric_limits<double>::infinity();
}

} // namespace

Forcing grid_forcing(const Table& table) { return Forcing(GridForcing{table}); }

Forcing dirac(double time, Eigen::VectorXd amplitude)
{
    if (!std::isfinite(time) || !amplitude.allFinite())
        throw InvalidInput("dirac forcing must be finite");
    return Forcing(DiracForcing{time, std::move(amplitude)});
}

Forcing cdf_forcing(const Table& cdf) { return Forcing(CdfForcing{cdf}); }

GridFunction regular_part(const Forcing& g, const Grid& grid, Index dim)
{
    GridFunction out(grid, dim);
    for (const auto& term : g.terms)
        if (const auto* f = std::get_if<GridForcing>(&term))
            out = out + table_on(f->table, grid, dim, "grid forcing");
    return out;
}

GridFunction jump_part(const Forcing& g, const Grid& grid, Index dim)
{
    GridFunction out(grid, dim);
    for (const auto& term : g.terms) {
        if (const auto* d = std::get_if<DiracForcing>(&term))
            out = out + dirac_on(*d, grid, dim);
        else if (const auto* c = std::get_if<CdfForcing>(&term))
            out = out + table_on(c->cdf, grid, dim, "cdf");
    }
    return out;
}

GridFunction forcing_antiderivative(const Forcing& g, const Grid& grid, Index dim)
{
    return antiderivative(regular_part(g, grid, dim)) + jump_part(g, grid, dim);
}

double support_start(const Forcing& g)
{
    double start = std::numeric_limits<double>::infinity();
    for (const auto& term : g.terms) {
        start = std::min(start, std::visit(Overloaded{
            [](const GridForcing& f) { return table_support(f.table); },
            [](const DiracForcing& d) {
                return d.amplitude.isZero(0) ? std::numeric_limits<double>::infinity() : d.time;
            },
            [](const CdfForcing& c) { return table_support(c.cdf); },
        }, term));
    }
    return start;
}

} // namespace nudde
