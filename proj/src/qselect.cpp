#include "qselect.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace arq {

double raic(const Dataset &d, const FitResult &fit) {
    if (!(fit.sigma2_raw > 0.0))
        throw Error(ErrCode::invalid, "raic: degenerate fit");
    const ObsScores o = per_observation(d, fit.params, fit.q);
    const double n = static_cast<double>(o.U.rows());
    const MatrixXd M1 =
        o.U.transpose() * o.w.array().square().matrix().asDiagonal() * o.U;
    const MatrixXd M2 = modified_score_jacobian(d, fit.params, fit.q);
    const double rc = rcond(M2);
    if (rc < kRcondMin)
        throw Error(ErrCode::singular, "raic: singular penalty matrix, rcond " +
                                           std::to_string(rc));
    const double penalty = -(M2.fullPivLu().solve(M1)).trace();
    return -lq_likelihood(d, fit.params, fit.q) / n + penalty;
}

std::vector<double> default_q_grid() {
    std::vector<double> g;
    g.reserve(71);
    for (int k = 30; k <= 100; ++k)
        g.push_back(static_cast<double>(k) / 100.0);
    return g;
}

int argmin_curve(const std::vector<QPoint> &curve) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(curve.size()); ++i) {
        if (curve[i].status != QPointStatus::ok)
            continue;
        if (best < 0 || curve[i].raic <= curve[best].raic)
            best = i; // equal values advance the pick to the larger q
    }
    return best;
}

QSearchResult select_q(const Dataset &d, int p, const std::vector<double> &grid,
                       const Control &c) {
    if (grid.empty())
        throw Error(ErrCode::invalid, "q grid must be nonempty");
    for (double q : grid)
        if (!(q > 0.0) || q > 1.0 + kQUnity)
            throw Error(ErrCode::invalid, "q grid values must lie in (0, 1]");
    std::vector<double> qs(grid);
    std::sort(qs.begin(), qs.end(), std::greater<double>());

    QSearchResult res;
    std::optional<Params> prev;
    std::vector<std::optional<FitResult>> fits;

    for (double q : qs) {
        std::optional<FitResult> fit;
        QPointStatus status = QPointStatus::nonconverged;
        auto attempt = [&](const Params *init) -> std::optional<FitResult> {
            try {
                return ira_fit(d, p, q, c, init);
            } catch (const Error &err) {
                status = err.code == ErrCode::degenerate_weights ? QPointStatus::degenerate
                                                                 : QPointStatus::singular;
                return std::nullopt;
            }
        };
        if (prev)
            fit = attempt(&*prev);
        if (!fit || !fit->converged)
            fit = attempt(nullptr);

        QPoint point;
        point.q = q;
        if (fit && fit->converged) {
            if (fit->degenerate) {
                point.status = QPointStatus::degenerate;
            } else {
                try {
                    point.raic = raic(d, *fit);
                    point.status = QPointStatus::ok;
                } catch (const Error &) {
                    point.status = QPointStatus::singular;
                }
            }
        } else {
            point.status = fit ? QPointStatus::nonconverged : status;
        }

        if (point.status == QPointStatus::ok) {
            prev = fit->params; // the warm chain advances only on valid fits
            fits.push_back(std::move(fit));
        } else {
            fits.emplace_back();
        }
        res.curve.push_back(point);
    }

    std::reverse(res.curve.begin(), res.curve.end()); // ascending q for output
    std::reverse(fits.begin(), fits.end());
    const int best = argmin_curve(res.curve);
    if (best < 0)
        throw Error(ErrCode::no_valid_q, "no grid point produced a usable fit");
    res.q_star = res.curve[best].q;
    res.fit = std::move(*fits[best]);
    return res;
}

} // namespace arq
