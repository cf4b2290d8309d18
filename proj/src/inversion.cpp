#include "wavop/inversion.hpp"
#include "wavop/error.hpp"
#include "wavop/parallel.hpp"
#include "wavop/quadrature.hpp"
#include "wavop/resolvent.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace wavop {

namespace {

double smallest_singular_value(const Eigen::MatrixXcd& A)
{
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A);
    return svd.singularValues()[svd.singularValues().size() - 1];
}

} // namespace

MLambdaMatrix m_lambda(double lambda, GridPtr g, const Eigen::VectorXd& v)
{
    if (v.size() != g->n) throw ConfigError("m_lambda: potential sample count differs from grid");
    MLambdaMatrix M;
    M.lambda = lambda;
    const Eigen::VectorXd col = v.cwiseProduct(g->mu);
    M.matrix = g0_reduced(lambda, g).k * col.cast<cplx>().asDiagonal();
    M.matrix.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M.matrix);
    const double rc = lu.rcond();
    M.condition = rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    return M;
}

Eigen::MatrixXcd invert_m(const MLambdaMatrix& M)
{
    if (!(M.condition < 1e12)) {
        const double smin = smallest_singular_value(M.matrix);
        std::ostringstream os;
        os << "invert_m: M(" << M.lambda << ") is numerically singular, smallest singular value " << smin;
        throw SingularMatrixError(os.str(), smin);
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M.matrix);
    Eigen::MatrixXcd inv = lu.inverse();
    const int n = int(M.matrix.rows());
    const double res = (M.matrix * inv - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(res <= 1e-8)) {
        std::ostringstream os;
        os << "invert_m: residual " << res << " exceeds 1e-8 at lambda = " << M.lambda;
        throw NumericalError(os.str());
    }
    return inv;
}

std::vector<int> potential_support(const Eigen::VectorXd& v)
{
    std::vector<int> idx;
    const double vmax = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
    if (vmax == 0) return idx;
    for (int i = 0; i < int(v.size()); ++i)
        if (std::abs(v[i]) > 1e-17 * vmax) idx.push_back(i);
    return idx;
}

Eigen::MatrixXcd m_inverse_minus_identity(double lambda, GridPtr g, const Eigen::VectorXd& v)
{
    const int n = g->n;
    const std::vector<int> S = potential_support(v);
    const int k = int(S.size());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    if (k == 0) return out;
    const Eigen::MatrixXcd G = g0_reduced(lambda, g).k;
    // M = 1 + U W with U = G(:,S), W = diag(V mu)(S,:)
    // M^{-1} - 1 = -U (1 + W U)^{-1} W
    Eigen::MatrixXcd U(n, k);
    Eigen::VectorXd dv(k);
    for (int b = 0; b < k; ++b) {
        U.col(b) = G.col(S[b]);
        dv[b] = v[S[b]] * g->mu[S[b]];
    }
    Eigen::MatrixXcd small(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) small(a, b) = (a == b ? 1.0 : 0.0) + dv[a] * U(S[a], b);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(small);
    if (!(lu.rcond() > 1e-14)) {
        const double smin = smallest_singular_value(small);
        throw SingularMatrixError("m_inverse_minus_identity: reduced M(lambda) is singular", smin);
    }
    // X = (1 + W U)^{-1} diag(dv), columns land in S
    const Eigen::MatrixXcd X = lu.solve(Eigen::MatrixXcd(dv.cast<cplx>().asDiagonal()));
    const Eigen::MatrixXcd Y = -U * X;
    for (int b = 0; b < k; ++b) out.col(S[b]) = Y.col(b);
    return out;
}

FeshbachDecomposition feshbach_decompose(const Eigen::MatrixXcd& L, const Eigen::MatrixXcd& T, int n0)
{
    const int n = int(L.rows());
    if (L.cols() != n || T.rows() != n || T.cols() != n) throw ConfigError("feshbach_decompose: shape mismatch");
    if (n0 < 1 || n0 >= n) throw ConfigError("feshbach_decompose: both blocks must be non-empty");
    FeshbachDecomposition F;
    F.T = T;
    F.n0 = n0;
    const int n1 = n - n0;
    Eigen::PartialPivLU<Eigen::MatrixXcd> tl(T);
    const Eigen::MatrixXcd Lb = tl.solve(L * T);
    F.L00 = Lb.topLeftCorner(n0, n0);
    F.L01 = Lb.topRightCorner(n0, n1);
    F.L10 = Lb.bottomLeftCorner(n1, n0);
    F.L11 = Lb.bottomRightCorner(n1, n1);
    Eigen::PartialPivLU<Eigen::MatrixXcd> l00(F.L00);
    F.schur = F.L11 - F.L10 * l00.solve(F.L01);
    return F;
}

FeshbachDecomposition feshbach_from_projection(const Eigen::MatrixXcd& L, const Eigen::MatrixXcd& Q, int rank)
{
    const int n = int(Q.rows());
    if (rank < 1 || rank >= n) throw ConfigError("feshbach_from_projection: rank must lie in 1..n-1");
    const Eigen::MatrixXcd Qbar = Eigen::MatrixXcd::Identity(n, n) - Q;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> q0(Qbar), q1(Q);
    Eigen::MatrixXcd T(n, n);
    T.leftCols(n - rank) = (q0.householderQ() * Eigen::MatrixXcd::Identity(n, n)).leftCols(n - rank);
    T.rightCols(rank) = (q1.householderQ() * Eigen::MatrixXcd::Identity(n, n)).leftCols(rank);
    return feshbach_decompose(L, T, n - rank);
}

Eigen::MatrixXcd FeshbachDecomposition::reassemble() const
{
    const int n = int(T.rows()), n1 = n - n0;
    Eigen::MatrixXcd Lb(n, n);
    Lb.topLeftCorner(n0, n0) = L00;
    Lb.topRightCorner(n0, n1) = L01;
    Lb.bottomLeftCorner(n1, n0) = L10;
    Lb.bottomRightCorner(n1, n1) = L11;
    Eigen::PartialPivLU<Eigen::MatrixXcd> tl(T);
    return T * Lb * tl.inverse();
}

Eigen::MatrixXcd feshbach_invert(const FeshbachDecomposition& F)
{
    const int n = int(F.T.rows()), n0 = F.n0, n1 = n - n0;
    Eigen::FullPivLU<Eigen::MatrixXcd> l00(F.L00), c(F.schur);
    if (!l00.isInvertible()) throw NumericalError("feshbach_invert: L00 is singular");
    if (!c.isInvertible()) throw NumericalError("feshbach_invert: Schur complement C is singular");
    const Eigen::MatrixXcd L00i = l00.inverse();
    const Eigen::MatrixXcd Ci = c.inverse();
    Eigen::MatrixXcd B(n, n);
    B.topLeftCorner(n0, n0) = L00i + L00i * F.L01 * Ci * F.L10 * L00i;
    B.topRightCorner(n0, n1) = -L00i * F.L01 * Ci;
    B.bottomLeftCorner(n1, n0) = -Ci * F.L10 * L00i;
    B.bottomRightCorner(n1, n1) = Ci;
    // back to the original coordinates: L^{-1} = T B T^{-1}
    Eigen::PartialPivLU<Eigen::MatrixXcd> tl(F.T);
    return F.T * B * tl.inverse();
}

std::vector<double> singular_fit_ladder()
{
    return logspace(1e-3, 1e-1, 12);
}

namespace {

using BasisFn = std::function<double(double)>;

struct FitResult {
    std::vector<Eigen::MatrixXcd> coef;
    double residual = 0;
};

FitResult lsq_fit(const std::vector<double>& lams, const std::vector<Eigen::MatrixXcd>& Y, const std::vector<BasisFn>& basis)
{
    const int ns = int(lams.size()), nb = int(basis.size());
    Eigen::MatrixXd A(ns, nb);
    for (int i = 0; i < ns; ++i)
        for (int b = 0; b < nb; ++b) A(i, b) = lams[i] * lams[i] * basis[b](lams[i]);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    const Eigen::MatrixXd P = cod.pseudoInverse(); // nb x ns
    FitResult fr;
    const Eigen::Index rows = Y[0].rows(), cols = Y[0].cols();
    for (int b = 0; b < nb; ++b) {
        Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(rows, cols);
        for (int i = 0; i < ns; ++i) c += P(b, i) * Y[i];
        fr.coef.push_back(c);
    }
    double rn = 0, yn = 0;
    for (int i = 0; i < ns; ++i) {
        Eigen::MatrixXcd r = Y[i];
        for (int b = 0; b < nb; ++b) r -= A(i, b) * fr.coef[b];
        rn += r.squaredNorm();
        yn += Y[i].squaredNorm();
    }
    fr.residual = yn > 0 ? std::sqrt(rn / yn) : 0.0;
    return fr;
}

} // namespace

SingularFit singular_fit(GridPtr g, const PotentialSpec& V, const std::vector<double>& lambdas,
                         const ThresholdClassification& cls, SingularFitOptions opt)
{
    if (lambdas.size() < 6) throw ConfigError("singular_fit: need at least 6 lambda samples");
    for (double l : lambdas)
        if (!(l > 0)) throw DomainError("singular_fit: lambda samples must be positive");
    const int n = g->n;
    SingularFit out;
    out.lambdas = lambdas;
    Eigen::VectorXd v = V.sample(*g);
    out.v_norm = v.cwiseAbs().maxCoeff();
    const bool exceptional = cls.kind == ThresholdClassification::Kind::Exceptional;
    if (exceptional && opt.tune_coupling) {
        // coupling kappa with -1 in the spectrum of kappa D0 diag(V mu), D0 = G0(0)
        const Eigen::MatrixXd K0 = g0_reduced(0.0, g).k.real() * v.cwiseProduct(g->mu).asDiagonal();
        Eigen::EigenSolver<Eigen::MatrixXd> es(K0, false);
        double best = 0, dist = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const cplx mu = es.eigenvalues()[i];
            if (std::abs(mu + 1.0) < dist) {
                dist = std::abs(mu + 1.0);
                best = mu.real();
            }
        }
        out.coupling = -1.0 / best;
        v *= out.coupling;
    }

    std::vector<Eigen::MatrixXcd> Y(lambdas.size());
    ExceptionGuard guard;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < int(lambdas.size()); ++i)
        guard.run([&] {
            const double l = lambdas[i];
            Y[i] = l * l * m_inverse_minus_identity(l, g, v);
        });
    guard.rethrow();

    auto L = [](double l) { return std::log(l); };
    const std::vector<BasisFn> plain{[](double l) { return 1.0 / (l * l); }};
    std::vector<BasisFn> logb{[](double l) { return 1.0 / (l * l); },
                              [](double) { return 1.0; },
                              [](double l) { return l * l; },
                              [=](double l) { return L(l); },
                              [=](double l) { return L(l) * L(l); },
                              [=](double l) { return l * L(l); },
                              [=](double l) { return l * L(l) * L(l); },
                              [=](double l) { return l * l * L(l); },
                              [=](double l) { return l * l * L(l) * L(l); }};
    const FitResult fp = lsq_fit(lambdas, Y, plain);
    const FitResult fl = lsq_fit(lambdas, Y, logb);
    out.fitted_plain = fp.coef[0];
    out.fitted_p0v = fl.coef[0];
    out.residual_plain = fp.residual;
    out.residual_log = fl.residual;

    out.reference_p0v = (cls.p0 * v.asDiagonal()).cast<cplx>();
    if (cls.p0.rows() != n) out.reference_p0v = Eigen::MatrixXcd::Zero(n, n);
    out.coefficient_norm = weighted_opnorm_op(out.fitted_p0v, *g, 0, 0);
    const double ref = weighted_opnorm_op(out.reference_p0v, *g, 0, 0);
    if (ref > 0) {
        out.relative_error = weighted_opnorm_op(out.fitted_p0v - out.reference_p0v, *g, 0, 0) / ref;
        out.relative_error_weighted = weighted_opnorm_op(out.fitted_p0v - out.reference_p0v, *g, 3, 3) /
                                      weighted_opnorm_op(out.reference_p0v, *g, 3, 3);
    }
    // rank in the L^2-symmetrized form D A D^{-1}, D = sqrt(mu)
    const Eigen::VectorXd D = g->mu.cwiseSqrt();
    const Eigen::MatrixXcd S = D.cast<cplx>().asDiagonal() * out.fitted_p0v * D.cwiseInverse().cast<cplx>().asDiagonal();
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(S);
    const Eigen::VectorXd sv = svd.singularValues();
    for (int i = 0; i < std::min<int>(5, int(sv.size())); ++i) out.singular_values.push_back(sv[i]);
    for (int i = 0; i < int(sv.size()); ++i)
        if (sv[i] > 1e-2 * sv[0]) ++out.numerical_rank;
    return out;
}

KPropertyReport kproperty_probe(const MatrixFamily& K, double rho, int max_order, GridPtr g,
                                const std::vector<double>& lambdas, double growth_limit)
{
    if (max_order < 0 || max_order > 2) throw ConfigError("kproperty_probe: orders 0..2 only");
    if (lambdas.size() < 3) throw ConfigError("kproperty_probe: lattice too coarse, need >= 3 lambda values");
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] > lambdas[i - 1]) || lambdas[i] / lambdas[i - 1] > 4.0)
            throw ConfigError("kproperty_probe: lattice too coarse or not increasing");
    KPropertyReport rep;
    rep.lambdas = lambdas;
    rep.norms.assign(max_order + 1, std::vector<double>(lambdas.size()));
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const double l = lambdas[i];
        const double dl = 1e-2 * l;
        const Eigen::MatrixXcd k0 = K(l);
        Eigen::MatrixXcd kp, km;
        if (max_order >= 1) {
            kp = K(l + dl);
            km = K(l - dl);
        }
        for (int j = 0; j <= max_order; ++j) {
            Eigen::MatrixXcd D;
            if (j == 0) D = k0;
            else if (j == 1) D = (kp - km) / (2 * dl);
            else D = (kp - 2.0 * k0 + km) / (dl * dl);
            // <x>^{rho-j} K^{(j)} <x>^{rho-j}
            rep.norms[j][i] = weighted_opnorm_op(D, *g, -(rho - j), -(rho - j));
        }
    }
    for (int j = 0; j <= max_order; ++j) {
        auto scaled = [&](std::size_t i) {
            const double lg = std::log(lambdas[i]);
            return rep.norms[j][i] / (1.0 + lg * lg);
        };
        const double top = scaled(lambdas.size() - 1);
        double worst = 0;
        for (std::size_t i = 0; i < lambdas.size(); ++i) worst = std::max(worst, scaled(i));
        const double growth = top > 0 ? worst / top : (worst > 0 ? std::numeric_limits<double>::infinity() : 1.0);
        rep.growth.push_back(growth);
        if (growth > growth_limit) rep.violated = true;
    }
    return rep;
}

} // namespace wavop
