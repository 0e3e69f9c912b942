#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace arq {

std::vector<std::string> parameter_names(int M, int p) {
    std::vector<std::string> names;
    names.reserve(M + p + 1);
    for (int i = 1; i <= M; ++i)
        names.push_back("beta" + std::to_string(i));
    for (int i = 1; i <= p; ++i)
        names.push_back("phi" + std::to_string(i));
    names.push_back("sigma");
    return names;
}

Json finite_or_null(double v) {
    if (std::isfinite(v))
        return v;
    return nullptr;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Json provenance_block(const std::string &digest, const Json &config_echo) {
    Json prov;
    prov["version"] = kVersion;
    prov["input_digest"] = digest;
    prov["config"] = config_echo;
    return prov;
}

Json fit_block(const std::string &label, const FitResult &fit,
               const std::optional<Asymptotics> &asym,
               const std::vector<std::string> &names, double raic_value) {
    const int dim = fit.params.dim();
    Json b;
    b["method"] = label;
    b["q"] = fit.q;
    b["converged"] = fit.converged;
    b["iterations"] = fit.iterations;
    b["stationary"] = fit.stationary;
    b["degenerate"] = fit.degenerate;
    b["sigma2_raw"] = fit.sigma2_raw;
    b["sigma2_corrected"] = fit.sigma2_corrected;
    b["loglik"] = finite_or_null(fit.loglik);
    b["lq_value"] = finite_or_null(fit.lq_value);
    b["raic"] = finite_or_null(raic_value);

    Json est = Json::object();
    for (int i = 0; i < fit.params.M(); ++i)
        est[names[i]] = fit.params.beta(i);
    for (int i = 0; i < fit.params.p(); ++i)
        est[names[fit.params.M() + i]] = fit.params.phi(i);
    est[names[dim - 1]] = std::sqrt(std::max(fit.sigma2_raw, 0.0));
    b["estimates"] = est;

    if (asym) {
        b["level"] = asym->level;
        Json se = Json::object(), lo = Json::object(), hi = Json::object();
        for (int i = 0; i < dim; ++i) {
            const double s = (i == dim - 1) ? asym->se_sigma : asym->se(i);
            se[names[i]] = s;
            lo[names[i]] = asym->ci_lower(i);
            hi[names[i]] = asym->ci_upper(i);
        }
        b["se"] = se;
        b["ci_lower"] = lo;
        b["ci_upper"] = hi;
    }
    return b;
}

Json fit_report_json(const std::string &label, const FitResult &fit,
                     const std::optional<Asymptotics> &asym,
                     const std::vector<std::string> &names, double raic_value,
                     const std::string &digest, const Json &config_echo) {
    Json r;
    r["report"] = "fit";
    r["provenance"] = provenance_block(digest, config_echo);
    r["fit"] = fit_block(label, fit, asym, names, raic_value);
    return r;
}

namespace {

const char *status_name(QPointStatus s) {
    switch (s) {
    case QPointStatus::ok:
        return "ok";
    case QPointStatus::nonconverged:
        return "nonconverged";
    case QPointStatus::singular:
        return "singular";
    case QPointStatus::degenerate:
        return "degenerate";
    }
    return "unknown";
}

} // namespace

Json qsearch_report_json(const QSearchResult &res,
                         const std::optional<Asymptotics> &asym,
                         const std::vector<std::string> &names, double raic_value,
                         const std::string &digest, const Json &config_echo) {
    Json r;
    r["report"] = "select-q";
    r["provenance"] = provenance_block(digest, config_echo);
    r["q_star"] = res.q_star;
    r["fit"] = fit_block("cmlq", res.fit, asym, names, raic_value);
    Json curve = Json::array();
    for (const auto &pt : res.curve) {
        Json c;
        c["q"] = pt.q;
        c["raic"] = pt.status == QPointStatus::ok ? Json(pt.raic) : Json(nullptr);
        c["status"] = status_name(pt.status);
        curve.push_back(std::move(c));
    }
    r["curve"] = curve;
    return r;
}

std::string curve_tsv(const std::vector<QPoint> &curve) {
    std::string out = "q\traic\n";
    for (const auto &pt : curve) {
        out += format_number(pt.q);
        out += '\t';
        out += pt.status == QPointStatus::ok ? format_number(pt.raic) : "nan";
        out += '\n';
    }
    return out;
}

namespace {

[[noreturn]] void bad_field(const std::string &name, const std::string &what) {
    throw Error(ErrCode::invalid, "config field '" + name + "': " + what);
}

const Json *find(const Json &j, const std::string &name) {
    auto it = j.find(name);
    return it == j.end() ? nullptr : &*it;
}

double as_number(const Json &v, const std::string &name) {
    if (!v.is_number())
        bad_field(name, "expected a number");
    return v.get<double>();
}

int as_int(const Json &v, const std::string &name) {
    if (!v.is_number_integer())
        bad_field(name, "expected an integer");
    return v.get<int>();
}

VectorXd as_vector(const Json &v, const std::string &name) {
    if (!v.is_array() || v.empty())
        bad_field(name, "expected a nonempty array of numbers");
    VectorXd out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number())
            bad_field(name, "expected a nonempty array of numbers");
        out(static_cast<int>(i)) = v[i].get<double>();
    }
    return out;
}

int parse_case(const Json &v) {
    if (v.is_number_integer()) {
        const int c = v.get<int>();
        if (c >= 1 && c <= 3)
            return c;
    } else if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "I" || s == "1")
            return 1;
        if (s == "II" || s == "2")
            return 2;
        if (s == "III" || s == "3")
            return 3;
    }
    bad_field("contamination.case", "expected I, II or III");
}

std::string trimmed_q(double q) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", q);
    return buf;
}

} // namespace

std::vector<double> expand_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo))
        throw Error(ErrCode::invalid, "config field 'grid': need lo <= hi and step > 0");
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (int k = 0; k < count; ++k)
        grid[k] = lo + k * step;
    grid.back() = std::min(grid.back(), hi);
    return grid;
}

ScenarioConfig scenario_from_json(const Json &j) {
    if (!j.is_object())
        throw Error(ErrCode::invalid, "config: expected a JSON object");
    ScenarioConfig cfg;
    for (auto it = j.begin(); it != j.end(); ++it) {
        static const char *known[] = {"N",    "beta_true",     "phi_true", "sigma_true",
                                      "contamination", "replications", "seed",
                                      "burn_in",       "methods",      "grid",
                                      "control"};
        bool ok = false;
        for (const char *k : known)
            ok = ok || it.key() == k;
        if (!ok)
            bad_field(it.key(), "unknown field");
    }
    if (const Json *v = find(j, "N"))
        cfg.N = as_int(*v, "N");
    else
        bad_field("N", "required");
    if (const Json *v = find(j, "beta_true"))
        cfg.beta_true = as_vector(*v, "beta_true");
    else
        bad_field("beta_true", "required");
    if (const Json *v = find(j, "phi_true"))
        cfg.phi_true = as_vector(*v, "phi_true");
    else
        cfg.phi_true = VectorXd(0);
    if (const Json *v = find(j, "sigma_true"))
        cfg.sigma_true = as_number(*v, "sigma_true");
    if (const Json *v = find(j, "replications"))
        cfg.replications = as_int(*v, "replications");
    if (const Json *v = find(j, "seed")) {
        if (!v->is_number_integer())
            bad_field("seed", "expected an integer");
        cfg.seed = v->get<std::uint64_t>();
    }
    if (const Json *v = find(j, "burn_in"))
        cfg.burn_in = as_int(*v, "burn_in");

    if (const Json *v = find(j, "contamination")) {
        if (!v->is_object())
            bad_field("contamination", "expected an object");
        if (const Json *c = find(*v, "case"))
            cfg.contamination.case_id = parse_case(*c);
        if (const Json *c = find(*v, "rate"))
            cfg.contamination.rate = as_number(*c, "contamination.rate");
        if (const Json *c = find(*v, "outlier_mean"))
            cfg.contamination.outlier_mean = as_number(*c, "contamination.outlier_mean");
        if (const Json *c = find(*v, "outlier_sd"))
            cfg.contamination.outlier_sd = as_number(*c, "contamination.outlier_sd");
        if (const Json *c = find(*v, "x_all_columns")) {
            if (!c->is_boolean())
                bad_field("contamination.x_all_columns", "expected a boolean");
            cfg.contamination.x_all_columns = c->get<bool>();
        }
        if (const Json *c = find(*v, "x_same_rows")) {
            if (!c->is_boolean())
                bad_field("contamination.x_same_rows", "expected a boolean");
            cfg.contamination.x_same_rows = c->get<bool>();
        }
    }

    if (const Json *v = find(j, "methods")) {
        if (!v->is_array() || v->empty())
            bad_field("methods", "expected a nonempty array");
        for (const Json &mj : *v) {
            if (!mj.is_object())
                bad_field("methods", "expected objects with a 'name' field");
            const Json *nm = find(mj, "name");
            if (!nm || !nm->is_string())
                bad_field("methods.name", "expected 'cml' or 'cmlq'");
            const std::string name = nm->get<std::string>();
            MethodSpec spec;
            if (name == "cml") {
                spec.label = "cml";
                spec.auto_q = false;
                spec.q = 1.0;
            } else if (name == "cmlq") {
                const Json *qv = find(mj, "q");
                if (!qv || (qv->is_string() && qv->get<std::string>() == "auto")) {
                    spec.auto_q = true;
                    spec.label = "cmlq@auto";
                } else if (qv->is_number()) {
                    spec.auto_q = false;
                    spec.q = qv->get<double>();
                    spec.label = "cmlq@" + trimmed_q(spec.q);
                } else {
                    bad_field("methods.q", "expected a number or \"auto\"");
                }
            } else {
                bad_field("methods.name", "expected 'cml' or 'cmlq'");
            }
            cfg.methods.push_back(std::move(spec));
        }
    } else {
        bad_field("methods", "required");
    }

    if (const Json *v = find(j, "grid")) {
        if (v->is_array()) {
            for (const Json &g : *v) {
                if (!g.is_number())
                    bad_field("grid", "expected numbers");
                cfg.grid.push_back(g.get<double>());
            }
        } else if (v->is_object()) {
            const Json *lo = find(*v, "lo");
            const Json *hi = find(*v, "hi");
            const Json *st = find(*v, "step");
            if (!lo || !hi || !st)
                bad_field("grid", "expected {lo, hi, step} or an array");
            cfg.grid = expand_grid(as_number(*lo, "grid.lo"), as_number(*hi, "grid.hi"),
                                   as_number(*st, "grid.step"));
        } else {
            bad_field("grid", "expected {lo, hi, step} or an array");
        }
    }

    if (const Json *v = find(j, "control")) {
        if (!v->is_object())
            bad_field("control", "expected an object");
        if (const Json *c = find(*v, "epsilon"))
            cfg.control.epsilon = as_number(*c, "control.epsilon");
        if (const Json *c = find(*v, "max_iter"))
            cfg.control.max_iter = as_int(*c, "control.max_iter");
        if (const Json *c = find(*v, "level"))
            cfg.control.level = as_number(*c, "control.level");
    }

    cfg.validate();
    return cfg;
}

Json scenario_to_json(const ScenarioConfig &cfg) {
    Json j;
    j["N"] = cfg.N;
    j["beta_true"] = std::vector<double>(cfg.beta_true.data(),
                                         cfg.beta_true.data() + cfg.beta_true.size());
    j["phi_true"] = std::vector<double>(cfg.phi_true.data(),
                                        cfg.phi_true.data() + cfg.phi_true.size());
    j["sigma_true"] = cfg.sigma_true;
    Json cont;
    static const char *case_names[] = {"I", "II", "III"};
    cont["case"] = case_names[cfg.contamination.case_id - 1];
    cont["rate"] = cfg.contamination.rate;
    cont["outlier_mean"] = cfg.contamination.outlier_mean;
    cont["outlier_sd"] = cfg.contamination.outlier_sd;
    cont["x_all_columns"] = cfg.contamination.x_all_columns;
    cont["x_same_rows"] = cfg.contamination.x_same_rows;
    j["contamination"] = cont;
    j["replications"] = cfg.replications;
    j["seed"] = cfg.seed;
    j["burn_in"] = cfg.burn_in;
    Json methods = Json::array();
    for (const auto &m : cfg.methods) {
        Json mj;
        const bool classical = m.label == "cml";
        mj["name"] = classical ? "cml" : "cmlq";
        if (!classical)
            mj["q"] = m.auto_q ? Json("auto") : Json(m.q);
        methods.push_back(std::move(mj));
    }
    j["methods"] = methods;
    j["grid"] = cfg.grid; // empty means the built-in default
    Json ctl;
    ctl["epsilon"] = cfg.control.epsilon;
    ctl["max_iter"] = cfg.control.max_iter;
    ctl["level"] = cfg.control.level;
    j["control"] = ctl;
    return j;
}

Json monte_carlo_report_json(const MonteCarloReport &report, const ScenarioConfig &cfg) {
    Json r;
    r["report"] = "simulate";
    r["version"] = kVersion;
    r["config"] = scenario_to_json(cfg);
    Json methods = Json::array();
    for (const auto &mr : report.methods) {
        Json mj;
        mj["method"] = mr.spec.label;
        mj["auto_q"] = mr.spec.auto_q;
        if (!mr.spec.auto_q)
            mj["q"] = mr.spec.q;
        mj["mean_q"] = mr.mean_q;
        mj["replications_used"] = static_cast<int>(mr.reps.size());
        mj["failures"] = mr.failures;
        Json params = Json::array();
        for (const auto &ps : mr.params) {
            Json pj;
            pj["name"] = ps.name;
            pj["truth"] = ps.truth;
            pj["mean"] = ps.mean;
            pj["bias"] = ps.bias;
            pj["rmse"] = ps.rmse;
            pj["mean_se"] = ps.mean_se;
            pj["sd"] = ps.sd;
            pj["ci_lower_mean"] = ps.ci_lower_mean;
            pj["ci_upper_mean"] = ps.ci_upper_mean;
            params.push_back(std::move(pj));
        }
        mj["parameters"] = params;
        methods.push_back(std::move(mj));
    }
    r["methods"] = methods;
    return r;
}

std::string summary_tsv(const MonteCarloReport &report) {
    std::string out = "method\tparam\ttruth\tEstimates\tBias\tRMSE\tSE\tCIL\tCIU\n";
    for (const auto &mr : report.methods) {
        for (const auto &ps : mr.params) {
            out += mr.spec.label;
            out += '\t';
            out += ps.name;
            out += '\t';
            out += format_number(ps.truth);
            out += '\t';
            out += format_number(ps.mean);
            out += '\t';
            out += format_number(ps.bias);
            out += '\t';
            out += format_number(ps.rmse);
            out += '\t';
            out += format_number(ps.mean_se);
            out += '\t';
            out += format_number(ps.ci_lower_mean);
            out += '\t';
            out += format_number(ps.ci_upper_mean);
            out += '\n';
        }
    }
    return out;
}

std::string replications_tsv(const MonteCarloReport &report,
                             const std::vector<std::string> &names) {
    std::string out = "method\trep\tq";
    for (const auto &n : names) {
        out += '\t';
        out += n;
    }
    out += '\n';
    for (const auto &mr : report.methods) {
        for (const auto &rec : mr.reps) {
            out += mr.spec.label;
            out += '\t';
            out += std::to_string(rec.rep);
            out += '\t';
            out += format_number(rec.q);
            for (int i = 0; i < rec.estimates.size(); ++i) {
                out += '\t';
                out += format_number(rec.estimates(i));
            }
            out += '\n';
        }
    }
    return out;
}

} // namespace arq
