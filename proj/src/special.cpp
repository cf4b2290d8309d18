#include "wavop/special.hpp"
#include "wavop/error.hpp"

#include <cmath>
#include <numbers>

namespace wavop {

namespace {
constexpr double kSeriesCut = 2.0;
constexpr double kEulerGamma = 0.57721566490153286061;
} // namespace

double sphere_area(int m)
{
    return 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m);
}

double digamma_int(int n)
{
    double s = -kEulerGamma;
    for (int k = 1; k < n; ++k) s += 1.0 / k;
    return s;
}

double binomial(int n, int k)
{
    if (k < 0 || k > n) return 0.0;
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

double bessel_uj(int nu, double z)
{
    if (nu < 0) throw DomainError("bessel_uj: negative order");
    z = std::abs(z);
    if (z < kSeriesCut) {
        // sum_k (-z^2/4)^k / (k! (nu+k)!) / 2^nu
        const double q = -0.25 * z * z;
        double term = 1.0 / (std::tgamma(nu + 1.0) * std::ldexp(1.0, nu));
        double s = term;
        for (int k = 1; k < 60; ++k) {
            term *= q / (k * double(nu + k));
            s += term;
            if (std::abs(term) < 1e-18 * std::abs(s)) break;
        }
        return s;
    }
    return std::cyl_bessel_j(double(nu), z) / std::pow(z, nu);
}

double bessel_uy(int nu, double z)
{
    if (nu < 0) throw DomainError("bessel_uy: negative order");
    if (!(z > 0)) throw DomainError("bessel_uy: argument must be positive");
    if (z >= kSeriesCut) return std::cyl_neumann(double(nu), z) / std::pow(z, nu);

    const double pi = std::numbers::pi;
    const double half = 0.5 * z;
    // finite part: -(1/pi) sum_{k<nu} (nu-k-1)!/k! (z/2)^{2k-nu}, divided by z^nu
    double fin = 0.0;
    for (int k = 0; k < nu; ++k)
        fin += std::tgamma(double(nu - k)) / std::tgamma(k + 1.0) * std::pow(half, 2 * k - nu);
    fin *= -1.0 / pi;
    // log part: (2/pi) log(z/2) J_nu(z)
    const double logpart = (2.0 / pi) * std::log(half) * bessel_uj(nu, z);
    // series: -(1/pi) sum_k [psi(k+1)+psi(nu+k+1)] (-z^2/4)^k (z/2)^nu / (k!(nu+k)!)
    const double q = -half * half;
    double term = 1.0 / std::tgamma(nu + 1.0); // k = 0, (z/2)^nu folded below
    double s = (digamma_int(1) + digamma_int(nu + 1)) * term;
    for (int k = 1; k < 60; ++k) {
        term *= q / (k * double(nu + k));
        const double t = (digamma_int(k + 1) + digamma_int(nu + k + 1)) * term;
        s += t;
        if (std::abs(t) < 1e-18 * std::abs(s)) break;
    }
    // (z/2)^nu / z^nu = 2^-nu
    const double ser = -(1.0 / pi) * s * std::ldexp(1.0, -nu);
    return fin / std::pow(z, nu) + logpart + ser;
}

cplx bessel_uh(int nu, double z)
{
    return {bessel_uj(nu, z), bessel_uy(nu, z)};
}

} // namespace wavop
