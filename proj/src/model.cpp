#include "model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace arq {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void Dataset::validate(int p) const {
    if (X.rows() != y.size())
        throw Error(ErrCode::invalid, "dataset: X has " + std::to_string(X.rows()) +
                                          " rows but y has " + std::to_string(y.size()));
    if (p < 0)
        throw Error(ErrCode::invalid, "ar order must be nonnegative");
    if (!y.allFinite() || !X.allFinite())
        throw Error(ErrCode::invalid, "dataset contains non-finite entries");
    if (N() < p + M() + 2)
        throw Error(ErrCode::invalid,
                    "need at least p + M + 2 = " + std::to_string(p + M() + 2) +
                        " observations, got " + std::to_string(N()));
}

VectorXd Params::flat() const {
    VectorXd v(dim());
    v.head(M()) = beta;
    v.segment(M(), p()) = phi;
    v(dim() - 1) = sigma2;
    return v;
}

Params Params::from_flat(const VectorXd &v, int M, int p) {
    Params t;
    t.beta = v.head(M);
    t.phi = v.segment(M, p);
    t.sigma2 = v(M + p);
    return t;
}

VectorXd backshift(const VectorXd &v, const VectorXd &phi) {
    const int N = static_cast<int>(v.size());
    const int p = static_cast<int>(phi.size());
    if (p >= N)
        throw Error(ErrCode::invalid, "backshift: ar order " + std::to_string(p) +
                                          " >= series length " + std::to_string(N));
    VectorXd out(N - p);
    for (int k = 0; k < N - p; ++k) {
        double s = v(p + k);
        for (int l = 1; l <= p; ++l)
            s -= phi(l - 1) * v(p + k - l);
        out(k) = s;
    }
    return out;
}

MatrixXd backshift_cols(const MatrixXd &X, const VectorXd &phi) {
    const int N = static_cast<int>(X.rows());
    const int p = static_cast<int>(phi.size());
    if (p >= N)
        throw Error(ErrCode::invalid, "backshift: ar order " + std::to_string(p) +
                                          " >= series length " + std::to_string(N));
    MatrixXd out(N - p, X.cols());
    for (int k = 0; k < N - p; ++k) {
        out.row(k) = X.row(p + k);
        for (int l = 1; l <= p; ++l)
            out.row(k) -= phi(l - 1) * X.row(p + k - l);
    }
    return out;
}

ResidualSet residuals(const Dataset &d, const VectorXd &beta, const VectorXd &phi) {
    if (beta.size() != d.M())
        throw Error(ErrCode::invalid, "residuals: beta length mismatch");
    ResidualSet r;
    r.e = d.y - d.X * beta;
    r.a = backshift(r.e, phi);
    return r;
}

bool is_stationary(const VectorXd &phi) {
    const int p = static_cast<int>(phi.size());
    if (p == 0)
        return true;
    if (!phi.allFinite())
        return false;
    if (p == 1)
        return std::abs(phi(0)) < 1.0 - kStationarityTol;
    MatrixXd companion = MatrixXd::Zero(p, p);
    companion.row(0) = phi.transpose();
    companion.block(1, 0, p - 1, p - 1).setIdentity();
    Eigen::EigenSolver<MatrixXd> es(companion, /*computeEigenvectors=*/false);
    return es.eigenvalues().array().abs().maxCoeff() < 1.0 - kStationarityTol;
}

double lq(double u, double q) {
    if (!(u > 0.0))
        throw Error(ErrCode::invalid, "lq: argument must be positive");
    if (!(q > 0.0))
        throw Error(ErrCode::invalid, "lq: q must be positive");
    if (std::abs(1.0 - q) < kQUnity)
        return std::log(u);
    return (std::pow(u, 1.0 - q) - 1.0) / (1.0 - q);
}

double normal_pdf(double a, double sigma2) {
    if (!(sigma2 > 0.0))
        throw Error(ErrCode::invalid, "normal_pdf: sigma2 must be positive");
    return std::exp(-a * a / (2.0 * sigma2)) / std::sqrt(kTwoPi * sigma2);
}

double conditional_log_likelihood(const Dataset &d, const Params &t) {
    if (!(t.sigma2 > 0.0))
        throw Error(ErrCode::invalid, "log-likelihood: sigma2 must be positive");
    const ResidualSet r = residuals(d, t.beta, t.phi);
    const double n = static_cast<double>(r.a.size());
    return -0.5 * n * std::log(kTwoPi * t.sigma2) - r.a.squaredNorm() / (2.0 * t.sigma2);
}

double lq_likelihood(const Dataset &d, const Params &t, double q) {
    if (!(q > 0.0))
        throw Error(ErrCode::invalid, "lq_likelihood: q must be positive");
    if (std::abs(1.0 - q) < kQUnity)
        return conditional_log_likelihood(d, t);
    if (!(t.sigma2 > 0.0))
        throw Error(ErrCode::invalid, "lq_likelihood: sigma2 must be positive");
    const ResidualSet r = residuals(d, t.beta, t.phi);
    double s = 0.0;
    for (int k = 0; k < r.a.size(); ++k) {
        const double f = normal_pdf(r.a(k), t.sigma2);
        s += (std::pow(f, 1.0 - q) - 1.0) / (1.0 - q);
    }
    return s;
}

VectorXd weights_of(const VectorXd &a, double sigma2, double q) {
    const int n = static_cast<int>(a.size());
    if (std::abs(1.0 - q) < kQUnity)
        return VectorXd::Ones(n);
    if (!(sigma2 > 0.0))
        throw Error(ErrCode::invalid, "weights: sigma2 must be positive");
    VectorXd w(n);
    for (int k = 0; k < n; ++k)
        w(k) = std::max(std::pow(normal_pdf(a(k), sigma2), 1.0 - q), kWeightFloor);
    return w;
}

VectorXd weights(const Dataset &d, const Params &t, double q) {
    return weights_of(residuals(d, t.beta, t.phi).a, t.sigma2, q);
}

namespace {

// Shared context for per-observation derivative assembly, t = p+1..N
// (observation k corresponds to data row p+k).
struct ObsContext {
    int n, M, p, d;
    MatrixXd tX;
    VectorXd e, a;
    double sigma2;
};

ObsContext make_context(const Dataset &d, const Params &t) {
    if (!(t.sigma2 > 0.0))
        throw Error(ErrCode::invalid, "derivatives: sigma2 must be positive");
    ObsContext c;
    c.M = d.M();
    c.p = t.p();
    c.d = t.dim();
    ResidualSet r = residuals(d, t.beta, t.phi);
    c.e = std::move(r.e);
    c.a = std::move(r.a);
    c.tX = backshift_cols(d.X, t.phi);
    c.n = static_cast<int>(c.a.size());
    c.sigma2 = t.sigma2;
    return c;
}

void fill_score(const ObsContext &c, int k, VectorXd &u) {
    const double s2 = c.sigma2;
    u.head(c.M) = c.a(k) / s2 * c.tX.row(k).transpose();
    for (int l = 1; l <= c.p; ++l)
        u(c.M + l - 1) = c.a(k) * c.e(c.p + k - l) / s2;
    u(c.d - 1) = -1.0 / (2.0 * s2) + c.a(k) * c.a(k) / (2.0 * s2 * s2);
}

void fill_hessian(const Dataset &d, const ObsContext &c, int k, MatrixXd &H) {
    const double s2 = c.sigma2;
    const double s4 = s2 * s2;
    const double ak = c.a(k);
    H.topLeftCorner(c.M, c.M).noalias() =
        -(c.tX.row(k).transpose() * c.tX.row(k)) / s2;
    for (int i = 1; i <= c.p; ++i) {
        const int col = c.M + i - 1;
        const double elag = c.e(c.p + k - i);
        for (int j = 0; j < c.M; ++j) {
            H(j, col) = -(elag * c.tX(k, j) + ak * d.X(c.p + k - i, j)) / s2;
            H(col, j) = H(j, col);
        }
        for (int r = 1; r <= c.p; ++r)
            H(col, c.M + r - 1) = -elag * c.e(c.p + k - r) / s2;
        // Differentiating the phi-score in sigma2 gives a unit factor here.
        H(col, c.d - 1) = -ak * elag / s4;
        H(c.d - 1, col) = H(col, c.d - 1);
    }
    for (int j = 0; j < c.M; ++j) {
        H(j, c.d - 1) = -ak * c.tX(k, j) / s4;
        H(c.d - 1, j) = H(j, c.d - 1);
    }
    H(c.d - 1, c.d - 1) = 1.0 / (2.0 * s4) - ak * ak / (s4 * s2);
}

} // namespace

ObsScores per_observation(const Dataset &d, const Params &t, double q) {
    const ObsContext c = make_context(d, t);
    ObsScores out;
    out.U.resize(c.n, c.d);
    out.a = c.a;
    out.w = weights_of(c.a, c.sigma2, q);
    VectorXd u(c.d);
    for (int k = 0; k < c.n; ++k) {
        fill_score(c, k, u);
        out.U.row(k) = u.transpose();
    }
    return out;
}

VectorXd score(const Dataset &d, const Params &t) {
    const ObsScores o = per_observation(d, t, 1.0);
    return o.U.colwise().sum().transpose();
}

VectorXd modified_score(const Dataset &d, const Params &t, double q) {
    if (std::abs(1.0 - q) < kQUnity)
        return score(d, t);
    const ObsScores o = per_observation(d, t, q);
    return o.U.transpose() * o.w;
}

MatrixXd modified_score_jacobian(const Dataset &d, const Params &t, double q) {
    const ObsContext c = make_context(d, t);
    const VectorXd w = weights_of(c.a, c.sigma2, q);
    const double one_minus_q = std::abs(1.0 - q) < kQUnity ? 0.0 : 1.0 - q;
    VectorXd u(c.d);
    MatrixXd H(c.d, c.d);
    MatrixXd J = MatrixXd::Zero(c.d, c.d);
    for (int k = 0; k < c.n; ++k) {
        fill_score(c, k, u);
        fill_hessian(d, c, k, H);
        if (one_minus_q != 0.0)
            H.noalias() += one_minus_q * (u * u.transpose());
        J.noalias() += w(k) * H;
    }
    return J;
}

MatrixXd score_jacobian(const Dataset &d, const Params &t) {
    return modified_score_jacobian(d, t, 1.0);
}

double rcond(const MatrixXd &A) {
    Eigen::JacobiSVD<MatrixXd> svd(A);
    const double smax = svd.singularValues().maxCoeff();
    if (!(smax > 0.0) || !std::isfinite(smax))
        return 0.0;
    const double smin = svd.singularValues().minCoeff();
    if (!std::isfinite(smin))
        return 0.0;
    return smin / smax;
}

} // namespace arq
