#include <nudde/table.hpp>

#include <algorithm>

namespace nudde {

Table::Table(Eigen::VectorXd times, Eigen::MatrixXd values)
    : times_(std::move(times)), values_(std::move(values))
{
    if (times_.size() < 1 || values_.rows() != times_.size() || values_.cols() < 1)
        throw InvalidInput("table: need at least one row and one value column");
    if (!times_.allFinite() || !values_.allFinite())
        throw InvalidInput("table: non-finite entry");
    for (Index i = 1; i < times_.size(); ++i) {
        if (times_(i) < times_(i - 1))
            throw InvalidInput("table: times must be nondecreasing");
        if (i >= 2 && times_(i) == times_(i - 1) && times_(i - 1) == times_(i - 2))
            throw InvalidInput("table: a time may repeat at most once");
    }
}

Table Table::constant(double t0, double t1, const Eigen::VectorXd& value)
{
    Eigen::VectorXd times(2);
    times << t0, t1;
    Eigen::MatrixXd values(2, value.size());
    values.row(0) = value.transpose();
    values.row(1) = value.transpose();
    return Table(times, values);
}

Eigen::VectorXd Table::eval(double t, Side side) const
{
    const double* begin = times_.data();
    const double* end = begin + times_.size();
    const double span = std::max(1.0, std::abs(last_time() - first_time()));
    const double eps = 1e-12 * span;
    if (t < first_time() - eps)
        return Eigen::VectorXd::Zero(columns());
    if (t > last_time() + eps)
        throw InvalidInput("table evaluated beyond its last time t=" + std::to_string(t));
    // Exact (up to eps) hit on a table time.
    const double* hit = std::lower_bound(begin, end, t - eps);
    if (hit != end && std::abs(*hit - t) <= eps) {
        auto k = hit - begin;
        if (side == Side::left) {
            if (k == 0)
                return Eigen::VectorXd::Zero(columns());
            return values_.row(k).transpose();
        }
        if (k + 1 < times_.size() && times_(k + 1) == times_(k))
            ++k;
        return values_.row(k).transpose();
    }
    const auto k = (std::upper_bound(begin, end, t) - begin) - 1;
    const double frac = (t - times_(k)) / (times_(k + 1) - times_(k));
    return (values_.row(k) + frac * (values_.row(k + 1) - values_.row(k))).transpose();
}

GridFunction Table::on_grid(const Grid& grid) const
{
    Eigen::MatrixXd values(grid.count(), columns());
    Eigen::MatrixXd left(grid.count(), columns());
    for (Index i = 0; i < grid.count(); ++i) {
        values.row(i) = eval(grid.node(i), Side::right).transpose();
        left.row(i) = eval(grid.node(i), Side::left).transpose();
    }
    return {grid, std::move(values), std::move(left)};
}

Eigen::MatrixXd as_operator(const Eigen::VectorXd& row, Index dim)
{
    if (row.size() == 1)
        return row(0) * Eigen::MatrixXd::Identity(dim, dim);
    if (row.size() == dim)
        return row.asDiagonal();
    if (row.size() == dim * dim) {
        Eigen::MatrixXd m(dim, dim);
        for (Index r = 0; r < dim; ++r)
            for (Index c = 0; c < dim; ++c)
                m(r, c) = row(r * dim + c);
        return m;
    }
    throw DimensionMismatch("table row has " + std::to_string(row.size()) +
                            " values; expected 1, d or d*d for d=" + std::to_string(dim));
}

double operator_norm(const Eigen::VectorXd& row, Index dim)
{
    if (row.size() == 1 || row.size() == dim)
        return row.cwiseAbs().maxCoeff();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(as_operator(row, dim));
    return svd.singularValues()(0);
}

bool table_shape_ok(const Table& table, Index dim)
{
    const Index k = table.columns();
    return k == 1 || k == dim || k == dim * dim;
}

} // namespace nudde
