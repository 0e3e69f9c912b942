#include "inference.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>

namespace arq {

Params surrogate_parameter(const Params &t, double q) {
    if (!(q > 0.0))
        throw Error(ErrCode::invalid, "surrogate parameter: q must be positive");
    Params s = t;
    s.sigma2 = q * t.sigma2;
    return s;
}

void estimate_JK(const Dataset &d, const Params &t, double q, MatrixXd &J, MatrixXd &K) {
    const ObsScores o = per_observation(d, t, q);
    const double n = static_cast<double>(o.U.rows());
    K = o.U.transpose() * o.w.array().square().matrix().asDiagonal() * o.U / n;
    J = modified_score_jacobian(d, t, q) / n;
}

double normal_quantile(double prob) {
    static const boost::math::normal_distribution<double> std_normal(0.0, 1.0);
    return boost::math::quantile(std_normal, prob);
}

Asymptotics asymptotic_report(const Dataset &d, const FitResult &fit, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw Error(ErrCode::invalid, "confidence level must lie in (0, 1)");
    if (!(fit.sigma2_raw > 0.0))
        throw Error(ErrCode::inference_unavailable,
                    "inference unavailable for a degenerate fit");
    const int n = d.N() - fit.params.p();
    const int dim = fit.params.dim();

    // The modified score's sigma2 block vanishes at sigma2_raw / q, so the
    // sandwich is evaluated there and rescaled to the raw sigma2 afterwards.
    Params eval = fit.params;
    eval.sigma2 = fit.sigma2_corrected;
    MatrixXd J, K;
    estimate_JK(d, eval, fit.q, J, K);
    const double rc = rcond(J);
    if (rc < kRcondMin)
        throw Error(ErrCode::inference_unavailable,
                    "singular sandwich Jacobian, condition number " +
                        std::to_string(rc > 0.0 ? 1.0 / rc : 0.0));
    const MatrixXd Jinv = J.fullPivLu().solve(MatrixXd::Identity(dim, dim));
    MatrixXd cov = Jinv * K * Jinv.transpose() / static_cast<double>(n);
    cov = ((cov + cov.transpose()) / 2.0).eval();
    VectorXd scale = VectorXd::Ones(dim);
    scale(dim - 1) = fit.q; // var(sigma2_raw) = q^2 var(sigma2_raw / q)
    cov = scale.asDiagonal() * cov * scale.asDiagonal();

    Asymptotics out;
    out.level = level;
    out.covariance = cov;
    out.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    const double sigma_hat = std::sqrt(fit.sigma2_raw);
    out.estimates = fit.params.flat();
    out.estimates(dim - 1) = sigma_hat;
    out.se_sigma = out.se(dim - 1) / (2.0 * sigma_hat);
    const double z = normal_quantile((1.0 + level) / 2.0);
    out.ci_lower = out.estimates - z * out.se;
    out.ci_upper = out.estimates + z * out.se;
    out.ci_lower(dim - 1) = sigma_hat - z * out.se_sigma;
    out.ci_upper(dim - 1) = sigma_hat + z * out.se_sigma;
    return out;
}

} // namespace arq
