#pragma once

#include "fit.hpp"
#include "qselect.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace arq {

struct ContaminationSpec {
    int case_id = 1; // 1 clean, 2 response outliers, 3 response + covariate outliers
    double rate = 0.10;
    double outlier_mean = 10.0;
    double outlier_sd = 1.0;
    bool x_all_columns = true; // case 3: replace every covariate of a hit row
    bool x_same_rows = false;  // case 3: reuse the response-outlier rows
};

struct MethodSpec {
    std::string label; // "cml", "cmlq@0.60", "cmlq@auto"
    bool auto_q = false;
    double q = 1.0;
};

struct ScenarioConfig {
    int N = 50;
    VectorXd beta_true;
    VectorXd phi_true;
    double sigma_true = 1.0;
    ContaminationSpec contamination;
    int replications = 100;
    std::uint64_t seed = 1;
    int burn_in = 500;
    std::vector<MethodSpec> methods;
    std::vector<double> grid; // empty selects the default grid
    Control control;
    void validate() const;
};

// Deterministic stream: mt19937_64 with a pinned Box-Muller transform, so
// simulated bytes do not depend on the standard library's normal sampler.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t master, std::uint64_t stream);
    double uniform(); // [0, 1)
    double normal();
    int below(int n); // uniform over {0, ..., n-1}
  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

Dataset generate_dataset(const ScenarioConfig &cfg, Rng &rng);
void contaminate(Dataset &d, const ContaminationSpec &spec, Rng &rng);

struct ParamSummary {
    std::string name;
    double truth = 0.0, mean = 0.0, bias = 0.0, rmse = 0.0;
    double mean_se = 0.0, sd = 0.0, ci_lower_mean = 0.0, ci_upper_mean = 0.0;
};

struct RepRecord {
    int rep = 0;
    double q = 1.0;
    VectorXd estimates; // beta, phi, sigma (sigma scale)
    VectorXd se;        // same layout, sigma entry via the delta method
    VectorXd ci_lower, ci_upper;
};

struct MethodReport {
    MethodSpec spec;
    std::vector<ParamSummary> params;
    std::vector<RepRecord> reps; // successful replications in rep order
    int failures = 0;
    double mean_q = 1.0;
};

struct MonteCarloReport {
    std::vector<MethodReport> methods;
};

// Replications own child RNG streams derived from (seed, rep), run on up
// to `jobs` threads, and aggregate in replication order; the report is
// identical for any jobs value.
MonteCarloReport run_study(const ScenarioConfig &cfg, int jobs);

} // namespace arq
