#pragma once

#include <nudde/grid.hpp>
#include <nudde/table.hpp>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace nudde {

/// Symbolic bound nu -> bound(nu) on a weighted Lipschitz constant. Built from
/// constants, e^{nu theta} (theta <= 0), nu^{-m}, the history factor
/// (p nu)^{-1/p}, weighted kernel integrals int_0^H |B(s)| e^{-nu s} ds and
/// p-dependent constants, closed under + and *.
class NormBound {
public:
    static NormBound constant(double c);
    static NormBound delay(double theta);
    static NormBound inverse_power(int m);
    static NormBound history_factor();
    static NormBound kernel_weight(const Table& kernel, double horizon, Index dim);
    static NormBound depends_on_p(std::function<double(double)> of_p, std::string label);

    double operator()(const Weight& w) const;

    std::string to_string() const;

    bool contains_history_factor() const;

    friend NormBound operator+(const NormBound& a, const NormBound& b);
    friend NormBound operator*(const NormBound& a, const NormBound& b);

    struct Node;

private:
    explicit NormBound(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// int_0^H integrand(B(s), s) ds, Simpson on each table cell.
double integrate_table(const Table& table, double horizon,
                       const std::function<double(const Eigen::VectorXd&, double)>& integrand);

/// int_0^H |B(s)| e^{-nu s} ds with |.| the spectral norm of the table row.
double weighted_kernel_integral(const Table& kernel, double horizon, Index dim, double nu);

} // namespace nudde
