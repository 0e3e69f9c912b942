#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>

using namespace arq;
using namespace testutil;

namespace {

using Verdict = std::pair<bool, std::string>;

template <typename F> void run_criterion(int num, F body) {
    bool pass = false;
    std::string detail;
    try {
        std::tie(pass, detail) = body();
    } catch (const std::exception &e) {
        detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %d: %s - %s\n", num, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(pass, detail);
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream ss;
    ss << std::setprecision(prec) << v;
    return ss.str();
}

bool within(double value, double center, double halfwidth) {
    return std::abs(value - center) <= halfwidth;
}

const MethodReport &find_method(const MonteCarloReport &rep, bool auto_q) {
    for (const auto &m : rep.methods)
        if (m.spec.auto_q == auto_q)
            return m;
    throw std::runtime_error("method not found in the study report");
}

double rmse_of(const MethodReport &m, const std::string &name) {
    for (const auto &ps : m.params)
        if (ps.name == name)
            return ps.rmse;
    throw std::runtime_error("parameter " + name + " not in the study report");
}

double bias_of(const MethodReport &m, const std::string &name) {
    for (const auto &ps : m.params)
        if (ps.name == name)
            return ps.bias;
    throw std::runtime_error("parameter " + name + " not in the study report");
}

ScenarioConfig load_config(const char *name) {
    return scenario_from_json(Json::parse(slurp(config_path(name))));
}

} // namespace

TEST_CASE("c01_reduction_identity") {
    run_criterion(1, []() -> Verdict {
        Timer timer;
        Rng meta(4242);
        double worst = 0.0;
        for (int i = 0; i < 25; ++i) {
            const int N = 30 + meta.below(171);
            const int M = 1 + meta.below(6);
            const int p = meta.below(4);
            Instance inst = make_instance(1000 + i, N, M, p);
            const FitResult a = ira_fit(inst.data, p, 1.0, Control{});
            const FitResult b = cml_fit(inst.data, p, Control{});
            VectorXd fa = a.params.flat(), fb = b.params.flat();
            fa(fa.size() - 1) = a.sigma2_raw;
            fb(fb.size() - 1) = b.sigma2_raw;
            worst = std::max(worst, (fa - fb).cwiseAbs().maxCoeff());
        }
        const double secs = timer.seconds();
        const bool pass = worst <= 1e-10 && secs < 30.0;
        return {pass, "max parameter difference " + fmt(worst, 3) + " over 25 "
                      "instances, " + fmt(secs, 3) + " s"};
    });
}

TEST_CASE("c02_derivative_oracles") {
    run_criterion(2, []() -> Verdict {
        Timer timer;
        Rng meta(777);
        double worst_grad = 0.0, worst_jac = 0.0;
        for (int i = 0; i < 20; ++i) {
            const int N = 30 + meta.below(51);
            const int M = 1 + meta.below(3);
            const int p = meta.below(3);
            Instance inst = make_instance(2000 + i, N, M, p);
            Params t = inst.truth;
            for (int k = 0; k < M; ++k)
                t.beta(k) += 0.3 * meta.normal();
            for (int k = 0; k < p; ++k)
                t.phi(k) += 0.1 * meta.normal();
            t.sigma2 = 0.5 + meta.uniform();
            const double q = 0.4 + 0.59 * meta.uniform();
            const auto lik = [&](const VectorXd &v) {
                return lq_likelihood(inst.data, Params::from_flat(v, M, p), q);
            };
            const auto grad = [&](const VectorXd &v) {
                return modified_score(inst.data, Params::from_flat(v, M, p), q);
            };
            worst_grad = std::max(
                worst_grad, max_rel_err(modified_score(inst.data, t, q),
                                        fd_gradient(lik, t.flat())));
            worst_jac = std::max(
                worst_jac, max_rel_err(modified_score_jacobian(inst.data, t, q),
                                       fd_jacobian(grad, t.flat())));
        }
        const double secs = timer.seconds();
        const bool pass = worst_grad < 1e-5 && worst_jac < 1e-4 && secs < 10.0;
        return {pass, "gradient error " + fmt(worst_grad, 3) + ", jacobian error " +
                      fmt(worst_jac, 3) + " over 20 points, " + fmt(secs, 3) + " s"};
    });
}

TEST_CASE("c03_ols_oracle") {
    run_criterion(3, []() -> Verdict {
        Rng meta(555);
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            const int N = 20 + meta.below(81);
            const int M = 1 + meta.below(4);
            Instance inst = make_instance(3000 + i, N, M, 0);
            const FitResult fit = cml_fit(inst.data, 0, Control{});
            const MatrixXd Xt = inst.data.X.transpose();
            const VectorXd ols =
                (Xt * inst.data.X).inverse() * (Xt * inst.data.y);
            worst =
                std::max(worst, (fit.params.beta - ols).cwiseAbs().maxCoeff());
        }
        return {worst <= 1e-10, "max slope difference " + fmt(worst, 3) +
                                " from the normal equations on 10 instances"};
    });
}

TEST_CASE("c04_surrogate_zero_mean") {
    run_criterion(4, []() -> Verdict {
        const double q = 0.8;
        ScenarioConfig cfg;
        cfg.N = 100001; // one lag conditions away the first row
        cfg.beta_true = VectorXd::Ones(1);
        cfg.phi_true = VectorXd::Constant(1, 0.5);
        cfg.sigma_true = 1.0;
        cfg.burn_in = 500;
        Rng rng(7);
        const Dataset d = generate_dataset(cfg, rng);
        Params truth;
        truth.beta = cfg.beta_true;
        truth.phi = cfg.phi_true;
        truth.sigma2 = 1.0;
        const Params target = surrogate_parameter(truth, q);
        const ObsScores o = per_observation(d, target, q);
        const int n = static_cast<int>(o.w.size());
        double worst_z = 0.0;
        for (int j = 0; j < o.U.cols(); ++j) {
            const VectorXd wu = o.U.col(j).cwiseProduct(o.w);
            const double mean = wu.mean();
            const double sd =
                std::sqrt((wu.array() - mean).square().sum() / (n - 1));
            worst_z = std::max(worst_z, std::abs(mean / (sd / std::sqrt(n))));
        }
        return {worst_z <= 3.0, "max |z| of the mean modified score " +
                                fmt(worst_z, 3) + " at the surrogate parameter, " +
                                std::to_string(n) + " innovations"};
    });
}

TEST_CASE("c05_belgium_cml_targets") {
    run_criterion(5, []() -> Verdict {
        Timer timer;
        const CsvLoad loaded = load_csv(belgium_path(), "calls", {"year"}, true);
        const FitResult fit = cml_fit(loaded.data, 1, Control{});
        const double penalty = raic(loaded.data, fit);
        const double b0 = fit.params.beta(0);
        const double b1 = fit.params.beta(1);
        const double phi = fit.params.phi(0);
        const double secs = timer.seconds();
        const bool pass = fit.converged && within(b0, -45.36, 1.0) &&
                          within(b1, 0.842, 0.02) && within(phi, 0.817, 0.03) &&
                          within(penalty, 61.37, 1.5) && secs < 1.0;
        return {pass, "intercept " + fmt(b0) + " (target -45.36+-1.0), slope " +
                      fmt(b1) + " (0.842+-0.02), lag " + fmt(phi) +
                      " (0.817+-0.03), penalty " + fmt(penalty) +
                      " (61.37+-1.5), " + fmt(secs, 3) + " s"};
    });
}

TEST_CASE("c06_belgium_cmlq_targets") {
    run_criterion(6, []() -> Verdict {
        const CsvLoad loaded = load_csv(belgium_path(), "calls", {"year"}, true);
        const QSearchResult res =
            select_q(loaded.data, 1, default_q_grid(), Control{});
        const FitResult cml = cml_fit(loaded.data, 1, Control{});
        const double penalty = raic(loaded.data, res.fit);
        const double b1 = res.fit.params.beta(1);
        const double phi = res.fit.params.phi(0);
        const double sigma_r = std::sqrt(res.fit.sigma2_raw);
        const double sigma_c = std::sqrt(cml.sigma2_raw);
        const bool pass = res.q_star >= 0.88 && res.q_star <= 0.95 &&
                          within(b1, 0.107, 0.03) && within(phi, 0.70, 0.05) &&
                          within(penalty, 38.7, 2.0) && sigma_r < 0.5 * sigma_c;
        return {pass, "selected q " + fmt(res.q_star) + " (target [0.88, 0.95]), "
                      "slope " + fmt(b1) + " (0.107+-0.03), lag " + fmt(phi) +
                      " (0.70+-0.05), penalty " + fmt(penalty) + " (38.7+-2), "
                      "sigma " + fmt(sigma_r) + " vs classical " + fmt(sigma_c)};
    });
}

TEST_CASE("c07_case2_dominance") {
    run_criterion(7, []() -> Verdict {
        Timer timer;
        int seeds_pass = 0, ratio_pass = 0, beta3_pass = 0;
        double min_beta3 = 1e300;
        for (int s = 0; s < 10; ++s) {
            bool ratios_ok = true;
            bool beta3_ok = true;
            for (const char *name : {"case2_p5.json", "case2_p10.json"}) {
                ScenarioConfig cfg = load_config(name);
                cfg.seed = 101 + s;
                const MonteCarloReport rep = run_study(cfg, 4);
                const MethodReport &classical = find_method(rep, false);
                const MethodReport &robust = find_method(rep, true);
                for (int b = 1; b <= cfg.beta_true.size(); ++b) {
                    const std::string nm = "beta" + std::to_string(b);
                    if (rmse_of(robust, nm) >= 0.5 * rmse_of(classical, nm))
                        ratios_ok = false;
                }
                if (cfg.beta_true.size() == 5) {
                    const double r3 = rmse_of(robust, "beta3");
                    min_beta3 = std::min(min_beta3, r3);
                    if (r3 >= 0.2)
                        beta3_ok = false;
                }
            }
            ratio_pass += ratios_ok ? 1 : 0;
            beta3_pass += beta3_ok ? 1 : 0;
            seeds_pass += (ratios_ok && beta3_ok) ? 1 : 0;
        }
        const double secs = timer.seconds();
        const bool pass = seeds_pass >= 9 && secs < 300.0;
        return {pass, std::to_string(seeds_pass) +
                      "/10 seeds pass both clauses (halved-RMSE clause " +
                      std::to_string(ratio_pass) + "/10, beta3 < 0.2 clause " +
                      std::to_string(beta3_pass) + "/10, smallest beta3 RMSE " +
                      fmt(min_beta3, 3) + "), " + fmt(secs, 4) + " s"};
    });
}

TEST_CASE("c08_case1_closeness") {
    run_criterion(8, []() -> Verdict {
        double worst_bias = 0.0, lo_ratio = 1e300, hi_ratio = 0.0;
        for (const char *name : {"case1_p5.json", "case1_p10.json"}) {
            const ScenarioConfig cfg = load_config(name);
            const MonteCarloReport rep = run_study(cfg, 4);
            const MethodReport &classical = find_method(rep, false);
            const MethodReport &robust = find_method(rep, true);
            for (int b = 1; b <= cfg.beta_true.size(); ++b) {
                const std::string nm = "beta" + std::to_string(b);
                worst_bias = std::max({worst_bias,
                                       std::abs(bias_of(classical, nm)),
                                       std::abs(bias_of(robust, nm))});
                const double ratio = rmse_of(robust, nm) / rmse_of(classical, nm);
                lo_ratio = std::min(lo_ratio, ratio);
                hi_ratio = std::max(hi_ratio, ratio);
            }
        }
        const bool pass = worst_bias < 0.15 && lo_ratio >= 0.5 && hi_ratio <= 2.0;
        return {pass, "worst |bias| " + fmt(worst_bias, 3) +
                      " (limit 0.15), RMSE ratio range [" + fmt(lo_ratio, 3) +
                      ", " + fmt(hi_ratio, 3) + "] (allowed [0.5, 2.0])"};
    });
}

TEST_CASE("c09_case3_direction") {
    run_criterion(9, []() -> Verdict {
        int wins = 0, total = 0;
        double worst_ratio = 0.0;
        for (const char *name : {"case3_p5.json", "case3_p10.json"}) {
            const ScenarioConfig cfg = load_config(name);
            const MonteCarloReport rep = run_study(cfg, 4);
            const MethodReport &classical = find_method(rep, false);
            const MethodReport &robust = find_method(rep, true);
            for (int b = 1; b <= cfg.beta_true.size(); ++b) {
                const std::string nm = "beta" + std::to_string(b);
                const double ratio = rmse_of(robust, nm) / rmse_of(classical, nm);
                worst_ratio = std::max(worst_ratio, ratio);
                wins += ratio < 1.0 ? 1 : 0;
                ++total;
            }
        }
        const bool pass = wins == total;
        return {pass, std::to_string(wins) + "/" + std::to_string(total) +
                      " slope coefficients with lower robust RMSE, worst "
                      "ratio " + fmt(worst_ratio, 3)};
    });
}

TEST_CASE("c10_simulate_determinism") {
    run_criterion(10, []() -> Verdict {
        Json cfg = Json::parse(slurp(config_path("case2_p5.json")));
        cfg["replications"] = 24;
        const auto cfg_path = scratch_dir() / "acceptance_sim.json";
        spit(cfg_path, cfg.dump(2));
        const auto report1 = scratch_dir() / "acc_rep1.json";
        const auto report8 = scratch_dir() / "acc_rep8.json";
        const auto summary1 = scratch_dir() / "acc_sum1.tsv";
        const auto summary8 = scratch_dir() / "acc_sum8.tsv";
        const auto reps1 = scratch_dir() / "acc_tab1.tsv";
        const auto reps8 = scratch_dir() / "acc_tab8.tsv";
        const CliRun a = run_cli("simulate --config " + cfg_path.string() +
                                 " --jobs 1 -o " + report1.string() +
                                 " --summary " + summary1.string() + " --reps " +
                                 reps1.string());
        const CliRun b = run_cli("simulate --config " + cfg_path.string() +
                                 " --jobs 8 -o " + report8.string() +
                                 " --summary " + summary8.string() + " --reps " +
                                 reps8.string());
        if (a.code != 0 || b.code != 0)
            return {false, "simulate exited with " + std::to_string(a.code) +
                           " and " + std::to_string(b.code)};
        const bool report_same = slurp(report1) == slurp(report8);
        const bool summary_same = slurp(summary1) == slurp(summary8);
        const bool reps_same = slurp(reps1) == slurp(reps8);
        const bool nonempty = !slurp(report1).empty() && !slurp(summary1).empty() &&
                              !slurp(reps1).empty();
        const bool pass = report_same && summary_same && reps_same && nonempty;
        return {pass, std::string("report/summary/replication files ") +
                      (report_same ? "match" : "differ") + "/" +
                      (summary_same ? "match" : "differ") + "/" +
                      (reps_same ? "match" : "differ") +
                      " between one and eight workers over 24 replications"};
    });
}

TEST_CASE("c11_weight_behavior") {
    run_criterion(11, []() -> Verdict {
        Instance inst = make_instance(2026, 60, 2, 1, 0.5);
        Dataset dirty = inst.data;
        dirty.y(30) += 50.0;
        const FitResult fit = ira_fit(dirty, 1, 0.6, Control{});
        if (!fit.converged || fit.degenerate)
            return {false, "contaminated fit did not converge cleanly"};
        const int hit = 30 - 1; // innovation index of data row 30
        const double w_hit = fit.final_weights(hit);
        std::vector<double> clean;
        for (int k = 0; k < fit.final_weights.size(); ++k)
            if (k != hit)
                clean.push_back(fit.final_weights(k));
        std::nth_element(clean.begin(), clean.begin() + clean.size() / 2,
                         clean.end());
        const double median = clean[clean.size() / 2];
        const bool pass = w_hit < 0.01 && median > 0.5;
        return {pass, "outlier row weight " + fmt(w_hit, 3) +
                      " (limit 0.01), median clean weight " + fmt(median, 3) +
                      " (floor 0.5)"};
    });
}
