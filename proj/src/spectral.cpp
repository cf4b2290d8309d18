#include "wavop/spectral.hpp"
#include "wavop/error.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wavop {

PotentialSpec PotentialSpec::zero()
{
    PotentialSpec p;
    p.kind = Kind::Zero;
    p.bound = 0;
    return p;
}

PotentialSpec PotentialSpec::gaussian(double v0, double width, double delta)
{
    if (!(width > 0)) throw ConfigError("gaussian potential: width must be positive");
    if (!(delta >= 0) || !std::isfinite(delta)) throw ConfigError("gaussian potential: delta must be finite and >= 0");
    PotentialSpec p;
    p.kind = Kind::Gaussian;
    p.v0 = v0;
    p.width = width;
    p.delta = delta;
    // sup_r <r>^delta e^{-r^2/w^2}
    const double a = 0.5 * delta * width * width;
    const double sup = a > 1 ? std::pow(a, 0.5 * delta) * std::exp(-(a - 1) / (width * width)) : 1.0;
    p.bound = std::abs(v0) * sup;
    return p;
}

PotentialSpec PotentialSpec::tabulated(std::vector<double> r, std::vector<double> v, double delta, double bound)
{
    if (r.size() < 2 || r.size() != v.size()) throw ConfigError("tabulated potential: need >= 2 matching (r, V) rows");
    for (std::size_t i = 1; i < r.size(); ++i)
        if (!(r[i] > r[i - 1])) throw ConfigError("tabulated potential: radii must increase");
    for (double x : v)
        if (!std::isfinite(x)) throw ConfigError("tabulated potential: non-finite sample");
    PotentialSpec p;
    p.kind = Kind::Tabulated;
    p.tab_r = std::move(r);
    p.tab_v = std::move(v);
    p.delta = delta;
    p.bound = bound;
    if (std::isinf(delta)) p.support = p.tab_r.back();
    return p;
}

PotentialSpec PotentialSpec::from_file(const std::string& path, double delta, double bound)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open potential table " + path);
    std::vector<double> r, v;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        double a, b;
        if (ls >> a >> b) {
            r.push_back(a);
            v.push_back(b);
        }
    }
    return tabulated(std::move(r), std::move(v), delta, bound);
}

double PotentialSpec::operator()(double r) const
{
    double v = 0;
    switch (kind) {
    case Kind::Zero: v = 0; break;
    case Kind::Gaussian: v = v0 * std::exp(-(r / width) * (r / width)); break;
    case Kind::ExceptionalM6: {
        if (r > 1) return 0.0;
        const double r2 = r * r;
        v = 96.0 * (r2 - 1.0) / (3.0 * r2 * r2 - 8.0 * r2 + 6.0);
        break;
    }
    case Kind::Tabulated: {
        if (r <= tab_r.front()) {
            v = tab_v.front();
        } else if (r >= tab_r.back()) {
            v = std::isinf(delta) ? 0.0 : tab_v.back();
        } else {
            auto it = std::upper_bound(tab_r.begin(), tab_r.end(), r);
            const std::size_t j = it - tab_r.begin();
            const double t = (r - tab_r[j - 1]) / (tab_r[j] - tab_r[j - 1]);
            v = (1 - t) * tab_v[j - 1] + t * tab_v[j];
        }
        break;
    }
    }
    return scale * v;
}

Eigen::VectorXd PotentialSpec::sample(const RadialGrid& g) const
{
    Eigen::VectorXd v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = (*this)(g.r[i]);
    if (!v.allFinite()) throw NumericalError("potential samples are not finite");
    return v;
}

PotentialSpec PotentialSpec::scaled(double s) const
{
    PotentialSpec p = *this;
    p.scale *= s;
    p.bound *= std::abs(s);
    return p;
}

std::string PotentialSpec::describe() const
{
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
    case Kind::Zero: os << "zero"; break;
    case Kind::Gaussian: os << "gaussian(v0=" << v0 << ",width=" << width << ")"; break;
    case Kind::ExceptionalM6: os << "exceptional_m6"; break;
    case Kind::Tabulated: os << "tabulated(" << tab_r.size() << " rows)"; break;
    }
    if (scale != 1) os << "*" << scale;
    return os.str();
}

void PotentialSpec::validate(const RadialGrid& g) const
{
    const Eigen::VectorXd v = sample(g);
    for (int i = 0; i < g.n; ++i) {
        const double r = g.r[i];
        if (std::isinf(delta)) {
            if (support > 0 && r > support && v[i] != 0)
                throw ConfigError("potential: nonzero sample outside the claimed support");
            if (std::abs(v[i]) > 1.05 * bound)
                throw ConfigError("potential: |V| exceeds the claimed bound at r = " + std::to_string(r));
        } else if (std::abs(v[i]) * std::pow(japanese(r), delta) > 1.05 * bound) {
            throw ConfigError("potential: decay claim |V| <= C<r>^-delta violated at r = " + std::to_string(r));
        }
    }
}

double exceptional_phi(double r)
{
    if (r <= 1) {
        const double r2 = r * r;
        return 6.0 - 8.0 * r2 + 3.0 * r2 * r2;
    }
    return std::pow(r, -4.0);
}

PotentialSpec make_exceptional_potential(int m)
{
    if (m != 6) throw ConfigError("make_exceptional_potential: only m = 6 has a shipped closed form");
    PotentialSpec p;
    p.kind = PotentialSpec::Kind::ExceptionalM6;
    p.delta = std::numeric_limits<double>::infinity();
    // max |V| at r^2 = 1 - 1/sqrt(3)
    p.bound = 24.0 * (std::sqrt(3.0) - 1.0);
    p.support = 1.0;
    return p;
}

Hamiltonian build_hamiltonian(GridPtr g, const PotentialSpec& V, HamiltonianOptions opt)
{
    const int n = g->n, m = g->m;
    const double h = g->h, S = g->sphere();
    Hamiltonian H;
    H.grid = g;
    H.potential = V;
    H.opt = opt;
    H.v = V.sample(*g);
    H.d.resize(n);
    H.e.resize(n - 1);
    H.s.resize(n);
    const bool robin = opt.outer == OuterBoundary::ZeroEnergyRobin;

    if (opt.scheme == Scheme::Centered) {
        const double cf = 0.25 * (m - 1) * (m - 3);
        for (int i = 0; i < n; ++i) {
            const double r = g->r[i];
            H.d[i] = 2.0 / (h * h) + cf / (r * r) + H.v[i];
            // Dirichlet puts the wall at r_{n+1}, so every node carries a full cell
            const double wt = robin ? g->w[i] : h;
            H.s[i] = std::sqrt(S * wt) * std::pow(r, 0.5 * (m - 1));
        }
        for (int i = 0; i + 1 < n; ++i) H.e[i] = -1.0 / (h * h);
        if (robin) {
            // ghost w_{n+1} = w_{n-1} + 2hk w_n with k = w'/w at R; the half cell at
            // the last node makes the row symmetric with off-diagonal -sqrt(2)/h^2
            const double R = g->r[n - 1];
            const double k = 0.5 * (m - 1) / R - (m - 2) / R;
            H.d[n - 1] = (2.0 - 2.0 * h * k) / (h * h) + cf / (R * R) + H.v[n - 1];
            H.e[n - 2] = -std::sqrt(2.0) / (h * h);
        }
    } else {
        Eigen::VectorXd mass(n), rp(n), rm(n);
        for (int i = 0; i < n; ++i) {
            rp[i] = g->r[i] + 0.5 * h;
            rm[i] = i == 0 ? 0.0 : g->r[i] - 0.5 * h;
            mass[i] = (std::pow(rp[i], m) - std::pow(rm[i], m)) / m;
            H.s[i] = std::sqrt(S * mass[i]);
        }
        for (int i = 0; i < n; ++i) {
            const double out = std::pow(rp[i], m - 1) / h;
            const double in = std::pow(rm[i], m - 1) / h;
            H.d[i] = (out + in) / mass[i] + H.v[i];
        }
        for (int i = 0; i + 1 < n; ++i) H.e[i] = -std::pow(rp[i], m - 1) / h / std::sqrt(mass[i] * mass[i + 1]);
        if (robin) {
            // outward flux R^{m-1} u'(R) = -(m-2) R^{m-2} u at the cell face R = r_n + h/2
            const double R = rp[n - 1];
            H.d[n - 1] = (std::pow(rm[n - 1], m - 1) / h + (m - 2) * std::pow(R, m - 2)) / mass[n - 1] + H.v[n - 1];
        }
    }
    if (!H.d.allFinite() || !H.e.allFinite()) throw NumericalError("build_hamiltonian: non-finite matrix entries");
    return H;
}

Eigen::MatrixXd Hamiltonian::matrix() const
{
    const int n = int(d.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) T(i, i) = d[i];
    for (int i = 0; i + 1 < n; ++i) T(i, i + 1) = T(i + 1, i) = e[i];
    return T;
}

double Hamiltonian::norm_bound() const
{
    const int n = int(d.size());
    double b = 0;
    for (int i = 0; i < n; ++i) {
        double row = std::abs(d[i]);
        if (i > 0) row += std::abs(e[i - 1]);
        if (i + 1 < n) row += std::abs(e[i]);
        b = std::max(b, row);
    }
    return b;
}

Eigen::VectorXcd Hamiltonian::apply_u(const Eigen::VectorXcd& u) const
{
    const int n = int(d.size());
    Eigen::VectorXcd x = s.cast<cplx>().cwiseProduct(u);
    Eigen::VectorXcd y(n);
    for (int i = 0; i < n; ++i) {
        cplx acc = d[i] * x[i];
        if (i > 0) acc += e[i - 1] * x[i - 1];
        if (i + 1 < n) acc += e[i] * x[i + 1];
        y[i] = acc;
    }
    return y.cwiseQuotient(s.cast<cplx>());
}

namespace {

EigenData run_dstevr(const Hamiltonian& H, char range, double vl, double vu, int il, int iu)
{
    const int n = int(H.d.size());
    std::vector<double> d(H.d.data(), H.d.data() + n);
    std::vector<double> e(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) e[i] = H.e[i];
    std::vector<double> w(n);
    int ncols = range == 'I' ? iu - il + 1 : n;
    std::vector<double> z(std::size_t(n) * std::max(ncols, 1));
    std::vector<lapack_int> isuppz(2 * std::size_t(n));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', range, n, d.data(), e.data(), vl, vu, il + 1, iu + 1, 0.0,
                                           &found, w.data(), z.data(), n, isuppz.data());
    if (info != 0) {
        std::ostringstream os;
        os << "eigensolve: dstevr failed with info = " << info << " (Gershgorin bound " << H.norm_bound() << ")";
        throw NumericalError(os.str());
    }
    EigenData E;
    E.grid = H.grid;
    E.s = H.s;
    E.values = Eigen::Map<Eigen::VectorXd>(w.data(), found);
    E.vectors = Eigen::Map<Eigen::MatrixXd>(z.data(), n, found);
    // deterministic sign: first significant component positive
    for (int k = 0; k < found; ++k) {
        auto col = E.vectors.col(k);
        const double big = col.cwiseAbs().maxCoeff();
        for (int i = 0; i < n; ++i)
            if (std::abs(col[i]) > 1e-6 * big) {
                if (col[i] < 0) col *= -1.0;
                break;
            }
    }
    return E;
}

} // namespace

EigenData eigensolve(const Hamiltonian& H)
{
    return run_dstevr(H, 'A', 0, 0, 0, 0);
}

EigenData eigensolve_window(const Hamiltonian& H, double vl, double vu)
{
    if (!(vu > vl)) throw ConfigError("eigensolve_window: need vl < vu");
    return run_dstevr(H, 'V', vl, vu, 0, 0);
}

EigenData eigensolve_index(const Hamiltonian& H, int il, int iu)
{
    const int n = int(H.d.size());
    if (il < 0 || iu < il || iu >= n) throw ConfigError("eigensolve_index: bad index range");
    return run_dstevr(H, 'I', 0, 0, il, iu);
}

double default_e_tol(GridPtr g, HamiltonianOptions opt)
{
    const Hamiltonian H0 = build_hamiltonian(g, PotentialSpec::zero(), opt);
    const EigenData E = eigensolve_index(H0, 0, 0);
    return 10.0 * E.values[0] / g->n;
}

double tail_slope(const RadialGrid& g, const Eigen::VectorXd& u)
{
    std::vector<double> x, y;
    for (int i = 0; i < g.n; ++i)
        if (g.r[i] >= 0.5 * g.rmax && std::abs(u[i]) > 0) {
            x.push_back(std::log(g.r[i]));
            y.push_back(std::log(std::abs(u[i])));
        }
    if (x.size() < 2) return -std::numeric_limits<double>::infinity();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ThresholdClassification classify(const Hamiltonian& H, double e_tol)
{
    const auto& g = *H.grid;
    if (g.m < 6) throw ConfigError("classify: requires m >= 6");
    if (!(e_tol > 0)) throw ConfigError("classify: e_tol must be positive");
    ThresholdClassification out;
    out.e_tol = e_tol;
    const EigenData E = eigensolve_window(H, -e_tol, e_tol);
    std::vector<int> keep;
    std::vector<double> rejected;
    for (int k = 0; k < int(E.values.size()); ++k) {
        const Eigen::VectorXd u = E.u_of(k);
        const double sl = tail_slope(g, u);
        if (std::abs(sl - (2 - g.m)) <= 0.5) {
            keep.push_back(k);
            out.energies.push_back(E.values[k]);
            out.tail_slopes.push_back(sl);
        } else {
            rejected.push_back(E.values[k]);
        }
    }
    if (!rejected.empty()) {
        std::vector<double> all(E.values.data(), E.values.data() + E.values.size());
        std::ostringstream os;
        os << "classify: e_tol = " << e_tol << " admits " << rejected.size()
           << " state(s) without the zero-energy tail; candidates:";
        for (double x : all) os << " " << x;
        throw AmbiguityError(os.str(), all);
    }
    const int d = int(keep.size());
    out.d = d;
    out.kind = d ? ThresholdClassification::Kind::Exceptional : ThresholdClassification::Kind::Generic;
    const int n = g.n;
    const Eigen::VectorXd meas = g.sphere() * g.mu;
    out.basis.resize(n, d);
    for (int j = 0; j < d; ++j) out.basis.col(j) = E.u_of(keep[j]);
    if (d == 0) {
        out.p0 = Eigen::MatrixXd::Zero(n, n);
        out.q = Eigen::MatrixXd::Zero(n, n);
        return out;
    }
    // B_ij = -<V phi_i, phi_j> must be positive definite on N
    Eigen::MatrixXd B = -out.basis.transpose() * (H.v.cwiseProduct(meas)).asDiagonal() * out.basis;
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    if (llt.info() != Eigen::Success) throw NumericalError("classify: -<V phi, phi> is not positive definite on the zero space");
    // phi <- phi L^{-T} makes the new Gram matrix the identity
    Eigen::MatrixXd Lt = llt.matrixL().transpose();
    out.basis = Lt.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(out.basis);
    const Eigen::MatrixXd Gm = out.basis.transpose() * meas.asDiagonal() * out.basis;
    out.p0 = out.basis * Gm.inverse() * out.basis.transpose() * meas.asDiagonal();
    out.q = -out.basis * out.basis.transpose() * (H.v.cwiseProduct(meas)).asDiagonal();
    return out;
}

ThresholdClassification classify(const Hamiltonian& H)
{
    return classify(H, default_e_tol(H.grid, H.opt));
}

RadialFunction pc_project(const EigenData& E, const RadialFunction& f, double threshold)
{
    require_same_grid(*E.grid, *f.grid, "pc_project");
    Eigen::VectorXcd x = E.s.cast<cplx>().cwiseProduct(f.v);
    for (int k = 0; k < int(E.values.size()); ++k)
        if (E.values[k] < threshold) {
            const Eigen::VectorXd c = E.vectors.col(k);
            x -= c.cast<cplx>() * c.cast<cplx>().dot(x);
        }
    return {f.grid, x.cwiseQuotient(E.s.cast<cplx>())};
}

} // namespace wavop
