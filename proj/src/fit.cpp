#include "fit.hpp"

#include <Eigen/QR>
#include <cmath>
#include <limits>

namespace arq {

namespace {

bool unit_q(double q) { return std::abs(1.0 - q) < kQUnity; }

VectorXd weighted_ls(const MatrixXd &A, const VectorXd &b, const VectorXd &w,
                     const char *what) {
    const int M = static_cast<int>(A.cols());
    if (M == 0)
        return VectorXd();
    const VectorXd sw = w.array().sqrt();
    const MatrixXd As = sw.asDiagonal() * A;
    const VectorXd bs = sw.asDiagonal() * b;
    Eigen::ColPivHouseholderQR<MatrixXd> qr(As);
    if (qr.rank() < M) {
        const auto diag = qr.matrixR().diagonal().head(M).cwiseAbs();
        const double dmax = diag.maxCoeff();
        const double dmin = diag.minCoeff();
        const double cond = dmin > 0.0 ? dmax / dmin : std::numeric_limits<double>::infinity();
        throw Error(ErrCode::singular, std::string(what) +
                                           ": rank-deficient system, condition number " +
                                           std::to_string(cond));
    }
    return qr.solve(bs);
}

} // namespace

VectorXd cmlq_beta_update(const Dataset &d, const VectorXd &phi, const VectorXd &w) {
    const MatrixXd tX = backshift_cols(d.X, phi);
    const VectorXd ty = backshift(d.y, phi);
    if (w.size() != ty.size())
        throw Error(ErrCode::invalid, "beta update: weight length mismatch");
    return weighted_ls(tX, ty, w, "beta update");
}

VectorXd cml_beta_update(const Dataset &d, const VectorXd &phi) {
    const int n = d.N() - static_cast<int>(phi.size());
    return cmlq_beta_update(d, phi, VectorXd::Ones(n));
}

VectorXd cmlq_phi_update(const Dataset &d, const VectorXd &beta, int p, const VectorXd &w) {
    if (p == 0)
        return VectorXd();
    const VectorXd e = d.y - d.X * beta;
    const int n = d.N() - p;
    if (w.size() != n)
        throw Error(ErrCode::invalid, "phi update: weight length mismatch");
    MatrixXd R = MatrixXd::Zero(p, p);
    VectorXd R0 = VectorXd::Zero(p);
    for (int k = 0; k < n; ++k) {
        for (int i = 1; i <= p; ++i) {
            const double ei = e(p + k - i);
            R0(i - 1) += w(k) * e(p + k) * ei;
            for (int r = i; r <= p; ++r)
                R(i - 1, r - 1) += w(k) * ei * e(p + k - r);
        }
    }
    R.triangularView<Eigen::StrictlyLower>() = R.transpose();
    const double rc = rcond(R);
    if (rc < kRcondMin)
        throw Error(ErrCode::singular,
                    "phi update: singular lag matrix, rcond " + std::to_string(rc));
    return R.fullPivLu().solve(R0);
}

VectorXd cml_phi_update(const Dataset &d, const VectorXd &beta, int p) {
    return cmlq_phi_update(d, beta, p, VectorXd::Ones(d.N() - p));
}

double cmlq_sigma_update(const Dataset &d, const VectorXd &beta, const VectorXd &phi,
                         const VectorXd &w, double q) {
    const ResidualSet r = residuals(d, beta, phi);
    if (w.size() != r.a.size())
        throw Error(ErrCode::invalid, "sigma update: weight length mismatch");
    const double ws = w.sum();
    if (!(ws > 0.0))
        throw Error(ErrCode::degenerate_weights, "sigma update: all-zero weights");
    return q * w.dot(r.a.cwiseAbs2()) / ws;
}

double cml_sigma_update(const Dataset &d, const VectorXd &beta, const VectorXd &phi) {
    const int n = d.N() - static_cast<int>(phi.size());
    return cmlq_sigma_update(d, beta, phi, VectorXd::Ones(n), 1.0);
}

FitResult ira_fit(const Dataset &d, int p, double q, const Control &c, const Params *init) {
    d.validate(p);
    if (!(q > 0.0) || q > 1.0 + kQUnity)
        throw Error(ErrCode::invalid, "q must lie in (0, 1]");
    const bool q1 = unit_q(q);
    const int n = d.N() - p;

    Params cur;
    if (init) {
        if (init->beta.size() != d.M() || init->phi.size() != p)
            throw Error(ErrCode::invalid, "initial parameters have wrong dimensions");
        if (!(init->sigma2 >= 0.0))
            throw Error(ErrCode::invalid, "initial sigma2 must be nonnegative");
        cur = *init;
    } else {
        cur.beta = weighted_ls(d.X, d.y, VectorXd::Ones(d.N()), "initial ols");
        cur.phi = VectorXd::Zero(p);
        cur.sigma2 = (d.y - d.X * cur.beta).squaredNorm() / d.N();
    }

    FitResult res;
    res.q = q;

    VectorXd w_used = VectorXd::Ones(n);
    bool converged = false;
    bool degenerate = false;
    int it = 0;

    if (cur.sigma2 == 0.0) {
        degenerate = converged = true;
    } else {
        while (it < c.max_iter) {
            ++it;
            const ResidualSet r = residuals(d, cur.beta, cur.phi);
            const VectorXd w = q1 ? VectorXd::Ones(n) : weights_of(r.a, cur.sigma2, q);
            if (!q1 && (w.array() <= kWeightFloor).all())
                throw Error(ErrCode::degenerate_weights,
                            "all weights underflowed at iteration " + std::to_string(it));
            Params next;
            next.phi = cmlq_phi_update(d, cur.beta, p, w);
            next.beta = cmlq_beta_update(d, next.phi, w);
            next.sigma2 = cmlq_sigma_update(d, next.beta, next.phi, w, q);
            w_used = w;

            const double dbeta =
                d.M() > 0 ? (next.beta - cur.beta).cwiseAbs().maxCoeff() : 0.0;
            const double dphi = p > 0 ? (next.phi - cur.phi).cwiseAbs().maxCoeff() : 0.0;
            const double dsigma = std::abs(next.sigma2 - cur.sigma2);
            cur = next;
            if (c.trace)
                res.trace.push_back(cur);
            if (cur.sigma2 == 0.0) {
                degenerate = converged = true;
                break;
            }
            if (dbeta < c.epsilon && dphi < c.epsilon && dsigma < c.epsilon) {
                converged = true;
                break;
            }
        }
    }

    res.params = cur;
    res.sigma2_raw = cur.sigma2;
    res.sigma2_corrected = q1 ? cur.sigma2 : cur.sigma2 / q;
    res.iterations = it;
    res.converged = converged;
    res.degenerate = degenerate;
    res.stationary = is_stationary(cur.phi);
    if (degenerate) {
        res.final_weights = w_used;
        res.loglik = std::numeric_limits<double>::quiet_NaN();
        res.lq_value = std::numeric_limits<double>::quiet_NaN();
    } else {
        res.final_weights =
            q1 ? VectorXd::Ones(n) : weights(d, cur, q);
        res.loglik = conditional_log_likelihood(d, cur);
        res.lq_value = lq_likelihood(d, cur, q);
    }
    return res;
}

FitResult cml_fit(const Dataset &d, int p, const Control &c) {
    return ira_fit(d, p, 1.0, c);
}

} // namespace arq
