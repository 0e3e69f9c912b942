#pragma once

#include "inference.hpp"
#include "qselect.hpp"
#include "simulate.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace arq {

// Insertion-ordered JSON keeps reports diffable and byte-stable.
using Json = nlohmann::ordered_json;

inline constexpr const char *kVersion = "1.0.0";

// beta1..betaM, phi1..phip, sigma.
std::vector<std::string> parameter_names(int M, int p);

// NaN and infinities have no JSON literal; store them as null.
Json finite_or_null(double v);

// {"version", "input_digest", "config"}; no timestamps, so identical
// inputs serialize to identical bytes.
Json provenance_block(const std::string &digest, const Json &config_echo);

Json fit_block(const std::string &label, const FitResult &fit,
               const std::optional<Asymptotics> &asym,
               const std::vector<std::string> &names, double raic_value);

Json fit_report_json(const std::string &label, const FitResult &fit,
                     const std::optional<Asymptotics> &asym,
                     const std::vector<std::string> &names, double raic_value,
                     const std::string &digest, const Json &config_echo);

Json qsearch_report_json(const QSearchResult &res,
                         const std::optional<Asymptotics> &asym,
                         const std::vector<std::string> &names, double raic_value,
                         const std::string &digest, const Json &config_echo);

// Two tab-separated columns, q and the penalty value; points the search
// skipped carry "nan".
std::string curve_tsv(const std::vector<QPoint> &curve);

// Inclusive arithmetic grid lo, lo+step, ..., hi.
std::vector<double> expand_grid(double lo, double hi, double step);

// Config file schema mirrors ScenarioConfig; errors name the field.
ScenarioConfig scenario_from_json(const Json &j);
Json scenario_to_json(const ScenarioConfig &cfg);

Json monte_carlo_report_json(const MonteCarloReport &report, const ScenarioConfig &cfg);

// method, param, truth, then the table column order used throughout:
// Estimates, Bias, RMSE, SE, CIL, CIU.
std::string summary_tsv(const MonteCarloReport &report);

// One row per method and replication: method, rep, q, then each
// parameter estimate. Raw material for boxplots.
std::string replications_tsv(const MonteCarloReport &report,
                             const std::vector<std::string> &names);

std::string format_number(double v); // %.17g

} // namespace arq
