#pragma once

#include <nudde/grid.hpp>

#include <Eigen/Dense>

#include <string>

namespace nudde {

/// Piecewise-linear table t -> value row. Times are nondecreasing; a repeated
/// time encodes a jump (first row is the left limit, second the right limit).
/// The table is zero before its first time and undefined after its last.
class Table {
public:
    Table() = default;
    Table(Eigen::VectorXd times, Eigen::MatrixXd values);

    /// Single-row-valued constant table on [t0, t1].
    static Table constant(double t0, double t1, const Eigen::VectorXd& value);

    Index rows() const { return times_.size(); }
    Index columns() const { return values_.cols(); }
    double first_time() const { return times_(0); }
    double last_time() const { return times_(times_.size() - 1); }
    const Eigen::VectorXd& times() const { return times_; }
    const Eigen::MatrixXd& values() const { return values_; }

    Eigen::VectorXd eval(double t, Side side = Side::right) const;

    /// Samples onto a grid, keeping jumps that fall on nodes.
    GridFunction on_grid(const Grid& grid) const;

    friend bool operator==(const Table& a, const Table& b)
    {
        return a.times_ == b.times_ && a.values_ == b.values_;
    }

private:
    Eigen::VectorXd times_;
    Eigen::MatrixXd values_;
};

/// Interprets a row of k table values as a d x d operator: k = 1 scalar,
/// k = d diagonal, k = d*d full matrix (row-major).
Eigen::MatrixXd as_operator(const Eigen::VectorXd& row, Index dim);

/// Spectral norm of as_operator(row, dim).
double operator_norm(const Eigen::VectorXd& row, Index dim);

bool table_shape_ok(const Table& table, Index dim);

} // namespace nudde
