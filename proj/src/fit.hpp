#pragma once

#include "model.hpp"

#include <vector>

namespace arq {

struct FitResult {
    Params params; // params.sigma2 == sigma2_raw
    double q = 1.0;
    double sigma2_raw = 0.0;
    double sigma2_corrected = 0.0; // sigma2_raw / q
    VectorXd final_weights;        // refreshed at the final parameters
    int iterations = 0;
    bool converged = false;
    bool stationary = true;
    bool degenerate = false; // exact fit, sigma2_raw == 0
    double loglik = 0.0;     // conditional log-likelihood at params
    double lq_value = 0.0;   // lq-likelihood at (params, q)
    std::vector<Params> trace;
};

// Closed-form block updates shared by the classical and weighted sweeps.
VectorXd cml_beta_update(const Dataset &d, const VectorXd &phi);
VectorXd cml_phi_update(const Dataset &d, const VectorXd &beta, int p);
double cml_sigma_update(const Dataset &d, const VectorXd &beta, const VectorXd &phi);

VectorXd cmlq_beta_update(const Dataset &d, const VectorXd &phi, const VectorXd &w);
VectorXd cmlq_phi_update(const Dataset &d, const VectorXd &beta, int p, const VectorXd &w);
double cmlq_sigma_update(const Dataset &d, const VectorXd &beta, const VectorXd &phi,
                         const VectorXd &w, double q);

// Iteratively reweighted sweep: weights at the current iterate, then
// phi update, beta update on the re-transformed data, and the
// q-multiplied sigma2 update, until each block moves less than epsilon.
// q = 1 runs the same path with unit weights (the classical fit).
// Non-convergence is reported through the result, not thrown.
FitResult ira_fit(const Dataset &d, int p, double q, const Control &c,
                  const Params *init = nullptr);
FitResult cml_fit(const Dataset &d, int p, const Control &c);

} // namespace arq
