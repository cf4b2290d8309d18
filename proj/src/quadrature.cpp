#include "wavop/quadrature.hpp"
#include "wavop/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace wavop {

namespace {

Rule legendre_newton(int n)
{
    Rule q;
    q.x.resize(n);
    q.w.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = 0;
            for (int k = 1; k <= n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // one more evaluation at the converged root for the weight
        double p0 = 1, p1 = 0;
        for (int k = 1; k <= n; ++k) {
            double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1);
        q.x[i] = -z;
        q.x[n - 1 - i] = z;
        q.w[i] = q.w[n - 1 - i] = 2.0 / ((1 - z * z) * dp * dp);
    }
    if (n % 2 == 1) q.x[n / 2] = 0.0;
    return q;
}

} // namespace

Rule gauss_legendre(int n)
{
    if (n < 1) throw ConfigError("gauss_legendre: n must be positive");
    static std::mutex mu;
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    return cache.emplace(n, legendre_newton(n)).first->second;
}

Rule gauss_legendre(int n, double a, double b)
{
    Rule q = gauss_legendre(n);
    const double c = 0.5 * (a + b), s = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        q.x[i] = c + s * q.x[i];
        q.w[i] *= s;
    }
    return q;
}

Rule gauss_laguerre(int n, double alpha)
{
    if (n < 1) throw ConfigError("gauss_laguerre: n must be positive");
    if (!(alpha > -1)) throw DomainError("gauss_laguerre: alpha must exceed -1");
    static std::mutex mu;
    static std::map<std::pair<int, double>, Rule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, alpha);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    Eigen::VectorXd d(n), e(n > 1 ? n - 1 : 1);
    for (int k = 0; k < n; ++k) d[k] = 2.0 * k + alpha + 1.0;
    for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(k * (k + alpha));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e.head(n - 1), Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw NumericalError("gauss_laguerre: eigensolver failed");
    Rule q;
    q.x.resize(n);
    q.w.resize(n);
    const double g = std::tgamma(alpha + 1.0);
    for (int k = 0; k < n; ++k) {
        q.x[k] = es.eigenvalues()[k];
        double v = es.eigenvectors()(0, k);
        q.w[k] = g * v * v;
    }
    return cache.emplace(key, q).first->second;
}

Rule composite_gauss_legendre(const std::vector<double>& edges, int per_panel)
{
    Rule out;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (!(edges[i + 1] > edges[i])) throw ConfigError("composite_gauss_legendre: edges must increase");
        Rule p = gauss_legendre(per_panel, edges[i], edges[i + 1]);
        out.x.insert(out.x.end(), p.x.begin(), p.x.end());
        out.w.insert(out.w.end(), p.w.begin(), p.w.end());
    }
    return out;
}

std::vector<double> logspace(double a, double b, int n)
{
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = a;
        return v;
    }
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i) v[i] = std::exp(la + (lb - la) * i / (n - 1));
    v.front() = a;
    v.back() = b;
    return v;
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = a;
        return v;
    }
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    v.back() = b;
    return v;
}

} // namespace wavop
