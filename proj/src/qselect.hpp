#pragma once

#include "fit.hpp"

#include <vector>

namespace arq {

enum class QPointStatus { ok = 0, nonconverged = 1, singular = 2, degenerate = 3 };

struct QPoint {
    double q = 0.0;
    double raic = 0.0; // meaningful only when status == ok
    QPointStatus status = QPointStatus::nonconverged;
};

struct QSearchResult {
    double q_star = 1.0;
    FitResult fit; // the fit at q_star
    std::vector<QPoint> curve;
};

// Robust AIC: mean negative Lq-likelihood plus tr(-M2^-1 M1), with
// M1 = sum u*_t u*_t' and M2 = sum grad u*_t at the fitted parameters.
double raic(const Dataset &d, const FitResult &fit);

// q = 0.30, 0.31, ..., 1.00.
std::vector<double> default_q_grid();

// Index of the minimizing valid point of an ascending-q curve, ties
// resolved toward the larger q; -1 when no point is valid.
int argmin_curve(const std::vector<QPoint> &curve);

// Descending scan with warm starts from the previous valid fit and a
// cold-start fallback; non-converged, degenerate, and singular-penalty
// points are recorded and skipped. Ties break toward larger q.
QSearchResult select_q(const Dataset &d, int p, const std::vector<double> &grid,
                       const Control &c);

} // namespace arq
