#pragma once

#include "core.hpp"

namespace arq {

// Phi(B)v_t = v_t - phi_1 v_{t-1} - ... - phi_p v_{t-p} for t = p+1..N.
VectorXd backshift(const VectorXd &v, const VectorXd &phi);
MatrixXd backshift_cols(const MatrixXd &X, const VectorXd &phi);

struct ResidualSet {
    VectorXd e; // length N, e_t = y_t - x_t' beta
    VectorXd a; // length N - p, innovations a_t = Phi(B) e_t
};
ResidualSet residuals(const Dataset &d, const VectorXd &beta, const VectorXd &phi);

// All roots of 1 - phi_1 z - ... - phi_p z^p outside the unit circle,
// checked via companion-matrix eigenvalues against 1 - kStationarityTol.
bool is_stationary(const VectorXd &phi);

double lq(double u, double q);
double normal_pdf(double a, double sigma2);

double conditional_log_likelihood(const Dataset &d, const Params &t);
double lq_likelihood(const Dataset &d, const Params &t, double q);

// w_t = f(a_t; 0, sigma2)^(1-q), floored at kWeightFloor; exactly 1 at q = 1.
VectorXd weights_of(const VectorXd &a, double sigma2, double q);
VectorXd weights(const Dataset &d, const Params &t, double q);

// Per-observation scores u_t (rows of U) and weights for t = p+1..N.
struct ObsScores {
    MatrixXd U;
    VectorXd w;
    VectorXd a;
};
ObsScores per_observation(const Dataset &d, const Params &t, double q);

VectorXd score(const Dataset &d, const Params &t);
VectorXd modified_score(const Dataset &d, const Params &t, double q);
MatrixXd score_jacobian(const Dataset &d, const Params &t);
// Sum_t w_t [ (1-q) u_t u_t' + H_t ].
MatrixXd modified_score_jacobian(const Dataset &d, const Params &t, double q);

// 1 / cond_2(A) via SVD; 0 for an all-zero matrix.
double rcond(const MatrixXd &A);

} // namespace arq
