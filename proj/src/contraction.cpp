#include <nudde/contraction.hpp>

namespace nudde {

namespace {

void require_contraction(double lip, const char* what)
{
    if (!(lip >= 0) || !(lip < 1))
        throw NotAContraction(std::string(what) + ": Lipschitz constant " + std::to_string(lip) +
                              " is not in [0, 1)");
}

} // namespace

std::string to_string(Termination t)
{
    switch (t) {
    case Termination::tolerance: return "tolerance";
    case Termination::max_iter: return "max_iter";
    case Termination::divergence: return "divergence";
    }
    return "unknown";
}

double a_priori_bound(double lip, int n, double d0)
{
    require_contraction(lip, "a priori bound");
    if (n < 0 || !(d0 >= 0))
        throw InvalidInput("a priori bound: need n >= 0 and d0 >= 0");
    return std::pow(lip, n) * d0 / (1 - lip);
}

double a_posteriori_bound(double lip, double d_last)
{
    require_contraction(lip, "a posteriori bound");
    if (!(d_last >= 0))
        throw InvalidInput("a posteriori bound: distance must be nonnegative");
    return lip * d_last / (1 - lip);
}

double perturbation_bound(double lipF, double lipG, double sup_diff)
{
    if (!(lipF >= 0) || !(lipG >= 0))
        throw InvalidInput("perturbation bound: Lipschitz constants must be nonnegative");
    require_contraction((lipF + lipG) / 2, "perturbation bound");
    if (!(sup_diff >= 0))
        throw InvalidInput("perturbation bound: sup difference must be nonnegative");
    return sup_diff / (1 - (lipF + lipG) / 2);
}

} // namespace nudde
