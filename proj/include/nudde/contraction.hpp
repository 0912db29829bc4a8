#pragma once

#include <nudde/errors.hpp>
#include <nudde/operators.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace nudde {

enum class Termination { tolerance, max_iter, divergence };

std::string to_string(Termination t);

struct FixedPointTrace {
    int iterations = 0;
    std::vector<double> distances; // d_k = |x_k - x_{k-1}|, k = 1..iterations
    double lipschitz = 0;
    Termination termination = Termination::max_iter;
    double certified_error = 0; // a_posteriori_bound(lipschitz, d_last)
    std::string diagnostic;
};

/// lip^n d0 / (1 - lip).
double a_priori_bound(double lip, int n, double d0);

/// lip d_last / (1 - lip).
double a_posteriori_bound(double lip, double d_last);

/// sup_diff / (1 - (lipF + lipG) / 2): distance between the fixed points of
/// two contractions whose values differ by at most sup_diff.
double perturbation_bound(double lipF, double lipG, double sup_diff);

/// Successive ratios above one this many times in a row signal divergence.
inline constexpr int divergence_streak = 5;
/// Ratios are only watched after this many steps.
inline constexpr int divergence_grace = 3;

template <typename State>
struct FixedPointResult {
    State x;
    FixedPointTrace trace;
};

/// Picard iteration x_{k+1} = step(x_k) until the a-posteriori bound drops to
/// tol or max_iter steps are taken.
template <typename State, typename Step, typename Norm>
FixedPointResult<State> fixed_point(Step&& step, Norm&& norm, double lip, State x0, double tol, int max_iter)
{
    if (!(lip >= 0) || !(lip < 1))
        throw NotAContraction("fixed point: Lipschitz constant " + std::to_string(lip) + " is not below 1");
    if (!(tol > 0) || max_iter < 1)
        throw InvalidInput("fixed point: need tol > 0 and max_iter >= 1");
    FixedPointTrace trace;
    trace.lipschitz = lip;
    State x = std::move(x0);
    int streak = 0;
    for (int k = 1; k <= max_iter; ++k) {
        State next = step(x);
        const double d = norm(next - x);
        x = std::move(next);
        trace.iterations = k;
        trace.distances.push_back(d);
        if (!std::isfinite(d)) {
            trace.termination = Termination::divergence;
            trace.diagnostic = "non-finite iterate at step " + std::to_string(k);
            break;
        }
        trace.certified_error = a_posteriori_bound(lip, d);
        if (trace.certified_error <= tol || d == 0) {
            trace.termination = Termination::tolerance;
            break;
        }
        if (k > divergence_grace && d > trace.distances[k - 2])
            ++streak;
        else
            streak = 0;
        if (streak >= divergence_streak) {
            trace.termination = Termination::divergence;
            trace.diagnostic = "successive distances grew " + std::to_string(divergence_streak) +
                               " times in a row (last ratio " +
                               std::to_string(d / trace.distances[k - 2]) + "); declared Lipschitz " +
                               std::to_string(lip) + " is wrong";
            break;
        }
    }
    if (trace.termination == Termination::divergence)
        trace.certified_error = std::numeric_limits<double>::infinity();
    return {std::move(x), std::move(trace)};
}

struct LiftedResult {
    GridFunction x; // antiderivative(w) + offset
    GridFunction w;
    FixedPointTrace trace;
};

/// Iterates on the derivative variable w and returns x = antiderivative(w),
/// plus an optional offset added to x.
template <typename Step, typename Norm>
LiftedResult lifted_fixed_point(Step&& step_on_derivative, Norm&& norm, double lip, GridFunction w0, double tol,
                                int max_iter, const std::optional<GridFunction>& offset = std::nullopt)
{
    auto run = fixed_point(std::forward<Step>(step_on_derivative), std::forward<Norm>(norm), lip, std::move(w0),
                           tol, max_iter);
    GridFunction x = antiderivative(run.x);
    if (offset)
        x = x + *offset;
    return {std::move(x), std::move(run.x), std::move(run.trace)};
}

} // namespace nudde
