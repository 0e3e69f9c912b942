#include "arq.h"

#include "csv.hpp"
#include "fit.hpp"
#include "inference.hpp"
#include "qselect.hpp"
#include "report.hpp"
#include "simulate.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

struct arq_dataset {
    arq::Dataset d;
    std::string digest;
};

struct arq_fit {
    arq::FitResult r;
};

struct arq_qsearch {
    arq::QSearchResult r;
};

namespace {

thread_local std::string g_last_error;

arq_status code_of(const arq::Error &e) {
    switch (e.code) {
    case arq::ErrCode::invalid:
        return ARQ_INVALID_INPUT;
    case arq::ErrCode::singular:
        return ARQ_SINGULAR;
    case arq::ErrCode::degenerate_weights:
        return ARQ_DEGENERATE_WEIGHTS;
    case arq::ErrCode::no_valid_q:
        return ARQ_NO_VALID_Q;
    case arq::ErrCode::inference_unavailable:
        return ARQ_INFERENCE_UNAVAILABLE;
    }
    return ARQ_INTERNAL;
}

template <typename F> arq_status guarded(F &&body) {
    try {
        body();
        g_last_error.clear();
        return ARQ_OK;
    } catch (const arq::Error &e) {
        g_last_error = e.what();
        return code_of(e);
    } catch (const std::exception &e) {
        g_last_error = e.what();
        return ARQ_INTERNAL;
    } catch (...) {
        g_last_error = "unidentified failure";
        return ARQ_INTERNAL;
    }
}

arq_status fail_invalid(const char *msg) {
    g_last_error = msg;
    return ARQ_INVALID_INPUT;
}

char *dup_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (out)
        std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

arq::Control control_of(const arq_control *c) {
    arq::Control ctl;
    if (c) {
        ctl.epsilon = c->epsilon;
        ctl.max_iter = c->max_iter;
        ctl.level = c->level;
    }
    return ctl;
}

arq::Json parse_echo(const char *config_echo_json) {
    if (!config_echo_json)
        return nullptr;
    arq::Json j = arq::Json::parse(config_echo_json, nullptr, false);
    if (j.is_discarded())
        throw arq::Error(arq::ErrCode::invalid, "config echo is not valid JSON");
    return j;
}

// Inference and the information penalty can fail on degenerate fits; the
// report then carries nulls instead of numbers.
std::optional<arq::Asymptotics> try_inference(const arq::Dataset &d,
                                              const arq::FitResult &fit,
                                              double level) {
    try {
        return arq::asymptotic_report(d, fit, level);
    } catch (const arq::Error &) {
        return std::nullopt;
    }
}

double try_raic(const arq::Dataset &d, const arq::FitResult &fit) {
    try {
        return arq::raic(d, fit);
    } catch (const arq::Error &) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

} // namespace

extern "C" {

void arq_control_defaults(arq_control *c) {
    if (!c)
        return;
    const arq::Control ctl;
    c->epsilon = ctl.epsilon;
    c->max_iter = ctl.max_iter;
    c->level = ctl.level;
}

const char *arq_version(void) { return arq::kVersion; }

const char *arq_status_message(arq_status s) {
    switch (s) {
    case ARQ_OK:
        return "ok";
    case ARQ_NONCONVERGENCE:
        return "iteration limit reached without convergence";
    case ARQ_INVALID_INPUT:
        return "invalid input";
    case ARQ_SINGULAR:
        return "singular matrix";
    case ARQ_DEGENERATE_WEIGHTS:
        return "all observation weights collapsed";
    case ARQ_NO_VALID_Q:
        return "no grid point produced a usable fit";
    case ARQ_INFERENCE_UNAVAILABLE:
        return "asymptotic inference unavailable for this fit";
    case ARQ_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

const char *arq_last_error(void) { return g_last_error.c_str(); }

arq_status arq_dataset_create(const double *y, const double *x, int n, int m,
                              arq_dataset **out) {
    if (!y || !x || !out || n <= 0 || m <= 0)
        return fail_invalid("arq_dataset_create: null buffer or nonpositive size");
    return guarded([&] {
        auto *d = new arq_dataset;
        d->d.y = Eigen::Map<const arq::VectorXd>(y, n);
        d->d.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>(x, n, m);
        *out = d;
    });
}

arq_status arq_dataset_from_csv(const char *path, const char *response,
                                const char *covariates, int intercept,
                                char delimiter, arq_dataset **out) {
    if (!path || !response || !out)
        return fail_invalid("arq_dataset_from_csv: null argument");
    return guarded([&] {
        std::vector<std::string> cols;
        if (covariates && *covariates) {
            std::stringstream ss(covariates);
            std::string item;
            while (std::getline(ss, item, ','))
                cols.push_back(item);
        }
        arq::CsvLoad loaded =
            arq::load_csv(path, response, cols, intercept != 0,
                          delimiter ? delimiter : ',');
        auto *d = new arq_dataset;
        d->d = std::move(loaded.data);
        d->digest = std::move(loaded.digest);
        *out = d;
    });
}

int arq_dataset_n(const arq_dataset *d) { return d ? d->d.N() : 0; }
int arq_dataset_m(const arq_dataset *d) { return d ? d->d.M() : 0; }
const char *arq_dataset_digest(const arq_dataset *d) {
    return d ? d->digest.c_str() : "";
}
void arq_dataset_free(arq_dataset *d) { delete d; }

arq_status arq_fit_run(const arq_dataset *d, int ar_order, double q,
                       const arq_control *c, arq_fit **out) {
    if (!d || !out)
        return fail_invalid("arq_fit_run: null argument");
    return guarded([&] {
        auto *f = new arq_fit;
        f->r = arq::ira_fit(d->d, ar_order, q, control_of(c));
        *out = f;
    });
}

int arq_fit_m(const arq_fit *f) { return f ? f->r.params.M() : 0; }
int arq_fit_p(const arq_fit *f) { return f ? f->r.params.p() : 0; }
int arq_fit_nobs(const arq_fit *f) {
    return f ? static_cast<int>(f->r.final_weights.size()) : 0;
}
int arq_fit_converged(const arq_fit *f) { return f && f->r.converged ? 1 : 0; }
int arq_fit_iterations(const arq_fit *f) { return f ? f->r.iterations : 0; }
int arq_fit_stationary(const arq_fit *f) { return f && f->r.stationary ? 1 : 0; }
int arq_fit_degenerate(const arq_fit *f) { return f && f->r.degenerate ? 1 : 0; }
double arq_fit_q(const arq_fit *f) { return f ? f->r.q : 0.0; }
double arq_fit_sigma2_raw(const arq_fit *f) { return f ? f->r.sigma2_raw : 0.0; }
double arq_fit_sigma2_corrected(const arq_fit *f) {
    return f ? f->r.sigma2_corrected : 0.0;
}
double arq_fit_loglik(const arq_fit *f) { return f ? f->r.loglik : 0.0; }
double arq_fit_lq_value(const arq_fit *f) { return f ? f->r.lq_value : 0.0; }

arq_status arq_fit_beta(const arq_fit *f, double *buf) {
    if (!f || !buf)
        return fail_invalid("arq_fit_beta: null argument");
    Eigen::Map<arq::VectorXd>(buf, f->r.params.M()) = f->r.params.beta;
    return ARQ_OK;
}

arq_status arq_fit_phi(const arq_fit *f, double *buf) {
    if (!f || !buf)
        return fail_invalid("arq_fit_phi: null argument");
    if (f->r.params.p() > 0)
        Eigen::Map<arq::VectorXd>(buf, f->r.params.p()) = f->r.params.phi;
    return ARQ_OK;
}

arq_status arq_fit_weights(const arq_fit *f, double *buf) {
    if (!f || !buf)
        return fail_invalid("arq_fit_weights: null argument");
    Eigen::Map<arq::VectorXd>(buf, f->r.final_weights.size()) = f->r.final_weights;
    return ARQ_OK;
}

arq_status arq_fit_inference(const arq_fit *f, const arq_dataset *d,
                             double level, double *se, double *ci_lo,
                             double *ci_hi) {
    if (!f || !d || !se || !ci_lo || !ci_hi)
        return fail_invalid("arq_fit_inference: null argument");
    return guarded([&] {
        const arq::Asymptotics a = arq::asymptotic_report(d->d, f->r, level);
        const int dim = f->r.params.dim();
        for (int i = 0; i < dim; ++i) {
            se[i] = (i == dim - 1) ? a.se_sigma : a.se(i);
            ci_lo[i] = a.ci_lower(i);
            ci_hi[i] = a.ci_upper(i);
        }
    });
}

arq_status arq_fit_raic(const arq_fit *f, const arq_dataset *d, double *out) {
    if (!f || !d || !out)
        return fail_invalid("arq_fit_raic: null argument");
    return guarded([&] { *out = arq::raic(d->d, f->r); });
}

void arq_fit_free(arq_fit *f) { delete f; }

arq_status arq_select_q(const arq_dataset *d, int ar_order, const double *grid,
                        int grid_len, const arq_control *c, arq_qsearch **out) {
    if (!d || !out || (grid_len > 0 && !grid))
        return fail_invalid("arq_select_q: null argument");
    return guarded([&] {
        std::vector<double> g;
        if (grid && grid_len > 0)
            g.assign(grid, grid + grid_len);
        else
            g = arq::default_q_grid();
        auto *s = new arq_qsearch;
        s->r = arq::select_q(d->d, ar_order, g, control_of(c));
        *out = s;
    });
}

double arq_qsearch_qstar(const arq_qsearch *s) { return s ? s->r.q_star : 0.0; }

int arq_qsearch_curve_size(const arq_qsearch *s) {
    return s ? static_cast<int>(s->r.curve.size()) : 0;
}

arq_status arq_qsearch_curve_point(const arq_qsearch *s, int i, double *q,
                                   double *raic, int *status) {
    if (!s || i < 0 || i >= static_cast<int>(s->r.curve.size()))
        return fail_invalid("arq_qsearch_curve_point: index out of range");
    const arq::QPoint &pt = s->r.curve[static_cast<size_t>(i)];
    if (q)
        *q = pt.q;
    if (raic)
        *raic = pt.raic;
    if (status)
        *status = static_cast<int>(pt.status);
    return ARQ_OK;
}

arq_status arq_qsearch_take_fit(const arq_qsearch *s, arq_fit **out) {
    if (!s || !out)
        return fail_invalid("arq_qsearch_take_fit: null argument");
    return guarded([&] {
        auto *f = new arq_fit;
        f->r = s->r.fit;
        *out = f;
    });
}

void arq_qsearch_free(arq_qsearch *s) { delete s; }

arq_status arq_fit_report_json(const arq_fit *f, const arq_dataset *d,
                               double level, const char *config_echo_json,
                               char **out) {
    if (!f || !d || !out)
        return fail_invalid("arq_fit_report_json: null argument");
    return guarded([&] {
        const arq::FitResult &r = f->r;
        const auto names = arq::parameter_names(r.params.M(), r.params.p());
        const auto asym = try_inference(d->d, r, level);
        const bool classical = std::abs(1.0 - r.q) < arq::kQUnity;
        arq::Json rep = arq::fit_report_json(classical ? "cml" : "cmlq", r, asym,
                                             names, try_raic(d->d, r), d->digest,
                                             parse_echo(config_echo_json));
        *out = dup_string(rep.dump(2));
    });
}

arq_status arq_qsearch_report_json(const arq_qsearch *s, const arq_dataset *d,
                                   double level, const char *config_echo_json,
                                   char **out) {
    if (!s || !d || !out)
        return fail_invalid("arq_qsearch_report_json: null argument");
    return guarded([&] {
        const arq::FitResult &r = s->r.fit;
        const auto names = arq::parameter_names(r.params.M(), r.params.p());
        const auto asym = try_inference(d->d, r, level);
        arq::Json rep = arq::qsearch_report_json(s->r, asym, names,
                                                 try_raic(d->d, r), d->digest,
                                                 parse_echo(config_echo_json));
        *out = dup_string(rep.dump(2));
    });
}

arq_status arq_qsearch_curve_tsv(const arq_qsearch *s, char **out) {
    if (!s || !out)
        return fail_invalid("arq_qsearch_curve_tsv: null argument");
    return guarded([&] { *out = dup_string(arq::curve_tsv(s->r.curve)); });
}

arq_status arq_simulate_json(const char *config_json, int jobs,
                             char **report_json, char **summary_tsv,
                             char **reps_tsv) {
    if (!config_json)
        return fail_invalid("arq_simulate_json: null config");
    return guarded([&] {
        arq::Json j = arq::Json::parse(config_json, nullptr, false);
        if (j.is_discarded())
            throw arq::Error(arq::ErrCode::invalid, "config is not valid JSON");
        const arq::ScenarioConfig cfg = arq::scenario_from_json(j);
        const arq::MonteCarloReport rep = arq::run_study(cfg, jobs < 1 ? 1 : jobs);
        if (report_json)
            *report_json = dup_string(arq::monte_carlo_report_json(rep, cfg).dump(2));
        if (summary_tsv)
            *summary_tsv = dup_string(arq::summary_tsv(rep));
        if (reps_tsv) {
            const auto names = arq::parameter_names(
                static_cast<int>(cfg.beta_true.size()),
                static_cast<int>(cfg.phi_true.size()));
            *reps_tsv = dup_string(arq::replications_tsv(rep, names));
        }
    });
}

void arq_string_free(char *s) { std::free(s); }

} /* extern "C" */
