#include <arq.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using Json = nlohmann::ordered_json;

struct DatasetHandle {
    arq_dataset *p = nullptr;
    ~DatasetHandle() { arq_dataset_free(p); }
};
struct FitHandle {
    arq_fit *p = nullptr;
    ~FitHandle() { arq_fit_free(p); }
};
struct QsearchHandle {
    arq_qsearch *p = nullptr;
    ~QsearchHandle() { arq_qsearch_free(p); }
};
struct StringHandle {
    char *p = nullptr;
    ~StringHandle() { arq_string_free(p); }
};

int exit_code_of(arq_status s) {
    switch (s) {
    case ARQ_OK:
        return 0;
    case ARQ_NONCONVERGENCE:
    case ARQ_NO_VALID_Q:
        return 2;
    case ARQ_INVALID_INPUT:
        return 3;
    default:
        return 4;
    }
}

int diagnose(const char *command, arq_status s) {
    std::cerr << "arq " << command << ": error: " << arq_status_message(s);
    const char *detail = arq_last_error();
    if (detail && *detail)
        std::cerr << ": " << detail;
    std::cerr << std::endl;
    return exit_code_of(s);
}

int fail_input(const char *command, const std::string &msg) {
    std::cerr << "arq " << command << ": error: " << msg << std::endl;
    return 3;
}

bool write_text(const std::string &path, const char *text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return bool(std::cout);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        return false;
    out << text;
    return bool(out);
}

struct DataOpts {
    std::string input;
    std::string response;
    std::vector<std::string> covariates;
    bool intercept = false;
    std::string delimiter = ",";
};

struct SolveOpts {
    int ar_order = 1;
    double level = 0.95;
    double epsilon = 1e-8;
    int max_iter = 500;
};

void add_data_options(CLI::App *cmd, DataOpts &d) {
    cmd->add_option("--input", d.input, "delimited data file with a header row")
        ->required();
    cmd->add_option("--response", d.response, "response column name")->required();
    cmd->add_option("--covariates", d.covariates,
                    "covariate column names (comma separated)")
        ->delimiter(',');
    cmd->add_flag("--intercept,!--no-intercept", d.intercept,
                  "prepend a constant-1 column");
    cmd->add_option("--delimiter", d.delimiter, "cell delimiter, default ','");
}

void add_solve_options(CLI::App *cmd, SolveOpts &s) {
    cmd->add_option("--ar-order", s.ar_order, "autoregressive error order p")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--level", s.level, "confidence level, default 0.95");
    cmd->add_option("--epsilon", s.epsilon, "per-block stopping tolerance");
    cmd->add_option("--max-iter", s.max_iter, "iteration cap");
}

arq_control control_of(const SolveOpts &s) {
    arq_control c;
    arq_control_defaults(&c);
    c.epsilon = s.epsilon;
    c.max_iter = s.max_iter;
    c.level = s.level;
    return c;
}

// "lo:step:hi", a comma list, or a single value.
std::vector<double> parse_grid(const std::string &spec) {
    std::vector<double> grid;
    const auto parse_one = [&](const std::string &tok) {
        size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size())
            throw std::invalid_argument("grid token '" + tok + "'");
        return v;
    };
    if (spec.find(':') != std::string::npos) {
        std::stringstream ss(spec);
        std::string tok;
        std::vector<double> parts;
        while (std::getline(ss, tok, ':'))
            parts.push_back(parse_one(tok));
        if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0])
            throw std::invalid_argument("grid spec must be lo:step:hi");
        const int count =
            static_cast<int>(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9)) + 1;
        for (int k = 0; k < count; ++k)
            grid.push_back(parts[0] + k * parts[1]);
    } else {
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ','))
            grid.push_back(parse_one(tok));
    }
    if (grid.empty())
        throw std::invalid_argument("empty grid spec");
    return grid;
}

int load_dataset(const char *command, const DataOpts &dopt, DatasetHandle &ds) {
    if (dopt.delimiter.size() != 1)
        return fail_input(command, "--delimiter must be a single character");
    std::string joined;
    for (size_t i = 0; i < dopt.covariates.size(); ++i) {
        if (i)
            joined += ',';
        joined += dopt.covariates[i];
    }
    const arq_status s =
        arq_dataset_from_csv(dopt.input.c_str(), dopt.response.c_str(),
                             joined.c_str(), dopt.intercept ? 1 : 0,
                             dopt.delimiter[0], &ds.p);
    if (s != ARQ_OK)
        return diagnose(command, s);
    return 0;
}

Json echo_common(const char *command, const DataOpts &d, const SolveOpts &s) {
    Json j;
    j["command"] = command;
    j["input"] = d.input;
    j["response"] = d.response;
    j["covariates"] = d.covariates;
    j["intercept"] = d.intercept;
    j["delimiter"] = d.delimiter;
    j["ar_order"] = s.ar_order;
    j["level"] = s.level;
    j["epsilon"] = s.epsilon;
    j["max_iter"] = s.max_iter;
    return j;
}

int emit_report(const char *command, const std::string &path, const char *text) {
    if (!write_text(path, text))
        return fail_input(command, "cannot write output file '" + path + "'");
    return 0;
}

int run_fixed_fit(const char *command, arq_dataset *ds, const SolveOpts &sopt,
                  double q, const std::string &output, const Json &echo) {
    const arq_control ctl = control_of(sopt);
    FitHandle fit;
    arq_status s = arq_fit_run(ds, sopt.ar_order, q, &ctl, &fit.p);
    if (s != ARQ_OK)
        return diagnose(command, s);
    StringHandle report;
    s = arq_fit_report_json(fit.p, ds, sopt.level, echo.dump().c_str(), &report.p);
    if (s != ARQ_OK)
        return diagnose(command, s);
    if (int rc = emit_report(command, output, report.p))
        return rc;
    if (!arq_fit_converged(fit.p)) {
        std::cerr << "arq " << command
                  << ": warning: iteration limit reached without convergence"
                  << std::endl;
        return 2;
    }
    return 0;
}

int run_q_search(const char *command, arq_dataset *ds, const SolveOpts &sopt,
                 const std::vector<double> &grid, const std::string &output,
                 const std::string &curve_path, const Json &echo) {
    const arq_control ctl = control_of(sopt);
    QsearchHandle search;
    arq_status s = arq_select_q(ds, sopt.ar_order, grid.empty() ? nullptr : grid.data(),
                                static_cast<int>(grid.size()), &ctl, &search.p);
    if (s != ARQ_OK)
        return diagnose(command, s);
    StringHandle report;
    s = arq_qsearch_report_json(search.p, ds, sopt.level, echo.dump().c_str(),
                                &report.p);
    if (s != ARQ_OK)
        return diagnose(command, s);
    if (int rc = emit_report(command, output, report.p))
        return rc;
    if (!curve_path.empty()) {
        StringHandle curve;
        s = arq_qsearch_curve_tsv(search.p, &curve.p);
        if (s != ARQ_OK)
            return diagnose(command, s);
        if (!write_text(curve_path, curve.p))
            return fail_input(command, "cannot write curve file '" + curve_path + "'");
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"regression with stationary AR(p) errors: classical (q = 1) and "
                 "robust maximum Lq-likelihood fits, penalty-guided q selection, "
                 "and a Monte Carlo contamination harness"};
    app.set_version_flag("--version", arq_version());
    app.require_subcommand(1);

    // fit
    DataOpts fit_data;
    SolveOpts fit_solve;
    std::string fit_method = "cml";
    std::string fit_q = "auto";
    std::string fit_grid;
    std::string fit_output;
    CLI::App *fit = app.add_subcommand("fit", "fit one model and report "
                                              "estimates, intervals and the "
                                              "selection penalty");
    add_data_options(fit, fit_data);
    add_solve_options(fit, fit_solve);
    fit->add_option("--method", fit_method, "cml or cmlq")
        ->check(CLI::IsMember({"cml", "cmlq"}));
    fit->add_option("--q", fit_q, "tuning parameter in (0, 1], or 'auto'");
    fit->add_option("--grid", fit_grid, "q grid as lo:step:hi (used with --q auto)");
    fit->add_option("--output,-o", fit_output, "report path, default stdout");

    // select-q
    DataOpts sel_data;
    SolveOpts sel_solve;
    std::string sel_grid;
    std::string sel_output;
    std::string sel_curve;
    CLI::App *sel = app.add_subcommand("select-q", "scan the q grid, report the "
                                                   "penalty curve and the q that "
                                                   "minimizes it");
    add_data_options(sel, sel_data);
    add_solve_options(sel, sel_solve);
    sel->add_option("--grid", sel_grid, "q grid as lo:step:hi");
    sel->add_option("--output,-o", sel_output, "report path, default stdout");
    sel->add_option("--curve", sel_curve, "two-column q/penalty file");

    // simulate
    std::string sim_config;
    std::string sim_output;
    std::string sim_summary;
    std::string sim_reps;
    int sim_jobs = 1;
    bool sim_has_seed = false;
    std::uint64_t sim_seed = 0;
    CLI::App *sim = app.add_subcommand("simulate", "run the configured Monte "
                                                   "Carlo contamination study");
    sim->add_option("--config", sim_config, "study config (JSON)")->required();
    sim->add_option("--jobs", sim_jobs, "worker threads, default 1")
        ->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "override the config seed")
        ->each([&](const std::string &) { sim_has_seed = true; });
    sim->add_option("--output,-o", sim_output, "report path, default stdout");
    sim->add_option("--summary", sim_summary, "per-parameter summary table (TSV)");
    sim->add_option("--reps", sim_reps, "per-replication estimates table (TSV)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    if (fit->parsed()) {
        DatasetHandle ds;
        if (int rc = load_dataset("fit", fit_data, ds))
            return rc;
        Json echo = echo_common("fit", fit_data, fit_solve);
        echo["method"] = fit_method;
        const bool wants_auto = fit_method == "cmlq" && fit_q == "auto";
        std::vector<double> grid;
        if (!fit_grid.empty()) {
            try {
                grid = parse_grid(fit_grid);
            } catch (const std::exception &e) {
                return fail_input("fit", e.what());
            }
        }
        if (fit_method == "cml") {
            if (fit->count("--q") > 0)
                return fail_input("fit", "--q applies to --method cmlq only");
            echo["q"] = 1.0;
            return run_fixed_fit("fit", ds.p, fit_solve, 1.0, fit_output, echo);
        }
        if (wants_auto) {
            echo["q"] = "auto";
            if (!fit_grid.empty())
                echo["grid"] = fit_grid;
            return run_q_search("fit", ds.p, fit_solve, grid, fit_output, "", echo);
        }
        double q = 0.0;
        try {
            size_t used = 0;
            q = std::stod(fit_q, &used);
            if (used != fit_q.size())
                throw std::invalid_argument(fit_q);
        } catch (const std::exception &) {
            return fail_input("fit", "--q expects a number in (0, 1] or 'auto'");
        }
        echo["q"] = q;
        return run_fixed_fit("fit", ds.p, fit_solve, q, fit_output, echo);
    }

    if (sel->parsed()) {
        DatasetHandle ds;
        if (int rc = load_dataset("select-q", sel_data, ds))
            return rc;
        Json echo = echo_common("select-q", sel_data, sel_solve);
        std::vector<double> grid;
        if (!sel_grid.empty()) {
            try {
                grid = parse_grid(sel_grid);
            } catch (const std::exception &e) {
                return fail_input("select-q", e.what());
            }
            echo["grid"] = sel_grid;
        }
        return run_q_search("select-q", ds.p, sel_solve, grid, sel_output,
                            sel_curve, echo);
    }

    // simulate
    std::ifstream in(sim_config, std::ios::binary);
    if (!in)
        return fail_input("simulate", "cannot open config file '" + sim_config + "'");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    Json cfg = Json::parse(text, nullptr, false);
    if (cfg.is_discarded())
        return fail_input("simulate", "config file '" + sim_config +
                                          "' is not valid JSON");
    if (sim_has_seed)
        cfg["seed"] = sim_seed;
    StringHandle report, summary, reps;
    const arq_status s = arq_simulate_json(cfg.dump().c_str(), sim_jobs, &report.p,
                                           sim_summary.empty() ? nullptr : &summary.p,
                                           sim_reps.empty() ? nullptr : &reps.p);
    if (s != ARQ_OK)
        return diagnose("simulate", s);
    if (int rc = emit_report("simulate", sim_output, report.p))
        return rc;
    if (!sim_summary.empty() && !write_text(sim_summary, summary.p))
        return fail_input("simulate", "cannot write summary file '" + sim_summary + "'");
    if (!sim_reps.empty() && !write_text(sim_reps, reps.p))
        return fail_input("simulate", "cannot write table file '" + sim_reps + "'");
    return 0;
}
