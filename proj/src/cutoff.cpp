#include "wavop/cutoff.hpp"
#include "wavop/error.hpp"

#include <cmath>
#include <numbers>

namespace wavop {

double smoothstep5(double x)
{
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    // x^6 sum_k C(5+k,k) C(11,6+k) (-x)^k
    static constexpr double c[6] = {462.0, -1980.0, 3465.0, -3080.0, 1386.0, -252.0};
    double p = 0;
    for (int k = 5; k >= 0; --k) p = p * x + c[k];
    const double x2 = x * x;
    return p * x2 * x2 * x2;
}

namespace {

double ramp_arg(const CutoffPair& c, double E)
{
    const double a = c.ramp * c.lambda0 * c.lambda0;
    const double b = c.lambda0 * c.lambda0;
    return (E - a) / (b - a);
}

} // namespace

// cos(pi/2) is not 0 in floating point; the supports are kept exact
double CutoffPair::phi(double E) const
{
    const double x = ramp_arg(*this, E);
    return x >= 1 ? 0.0 : std::cos(0.5 * std::numbers::pi * smoothstep5(x));
}

double CutoffPair::psi(double E) const
{
    const double x = ramp_arg(*this, E);
    return x >= 1 ? 1.0 : std::sin(0.5 * std::numbers::pi * smoothstep5(x));
}

double CutoffPair::phi_tilde(double lambda) const
{
    const double x = (std::abs(lambda) - lambda0) / lambda0;
    return 1.0 - smoothstep5(x);
}

void CutoffPair::validate() const
{
    if (!(lambda0 > 0) || !std::isfinite(lambda0)) throw ConfigError("cutoff: lambda0 must be positive");
    if (!(ramp >= 0 && ramp < 1)) throw ConfigError("cutoff: ramp must lie in [0,1)");
}

} // namespace wavop
