#pragma once

#include "fit.hpp"

namespace arq {

struct Asymptotics {
    MatrixXd covariance; // (M+p+1)^2 on the (beta, phi, sigma2_raw) scale
    VectorXd se;         // sqrt of the covariance diagonal
    VectorXd estimates;  // beta, phi, sigma (sqrt of sigma2_raw)
    VectorXd ci_lower;   // beta, phi on their own scale, last entry on the
    VectorXd ci_upper;   // sigma scale via the delta method
    double se_sigma = 0.0;
    double level = 0.95;
};

// Copies beta and phi, multiplies sigma2 by q: the parameter value the
// maximum-Lq estimating equations target.
Params surrogate_parameter(const Params &t, double q);

// Empirical plug-in sandwich pieces over t = p+1..N:
// J = (1/n) sum grad u*_t, K = (1/n) sum u*_t u*_t'.
void estimate_JK(const Dataset &d, const Params &t, double q, MatrixXd &J, MatrixXd &K);

Asymptotics asymptotic_report(const Dataset &d, const FitResult &fit, double level);

double normal_quantile(double prob);

} // namespace arq
