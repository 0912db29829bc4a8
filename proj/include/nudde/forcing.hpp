#pragma once

#include <nudde/grid.hpp>
#include <nudde/table.hpp>

#include <variant>
#include <vector>

namespace nudde {

/// Regular forcing f given as a table on the time axis.
struct GridForcing {
    Table table;
};

/// Point mass amplitude * delta_{time}.
struct DiracForcing {
    double time = 0;
    Eigen::VectorXd amplitude;
};

/// Measure given by its cumulative function M(t) = mu((-inf, t]).
struct CdfForcing {
    Table cdf;
};

using ForcingTerm = std::variant<GridForcing, DiracForcing, CdfForcing>;

/// Sum of forcing terms; empty means no forcing.
struct Forcing {
    std::vector<ForcingTerm> terms;

    Forcing() = default;
    Forcing(ForcingTerm term) { terms.push_back(std::move(term)); }

    Forcing& operator+=(const Forcing& other)
    {
        terms.insert(terms.end(), other.terms.begin(), other.terms.end());
        return *this;
    }
};

Forcing grid_forcing(const Table& table);
Forcing dirac(double time, Eigen::VectorXd amplitude);
Forcing cdf_forcing(const Table& cdf);

/// Antiderivative of the forcing on the grid. Dirac terms become
/// Heaviside(t - t0) u0, CDF terms are resampled directly.
GridFunction forcing_antiderivative(const Forcing& g, const Grid& grid, Index dim);

/// Only the grid terms, sampled (not integrated).
GridFunction regular_part(const Forcing& g, const Grid& grid, Index dim);

/// Antiderivative of the Dirac and CDF terms only.
GridFunction jump_part(const Forcing& g, const Grid& grid, Index dim);

/// Smallest time from which every term of g is supported.
double support_start(const Forcing& g);

} // namespace nudde
