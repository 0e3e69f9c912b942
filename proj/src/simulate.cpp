#include "simulate.hpp"

#include "inference.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <optional>
#include <thread>

namespace arq {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void ScenarioConfig::validate() const {
    if (N < 1)
        throw Error(ErrCode::invalid, "config field 'N': must be positive");
    if (beta_true.size() == 0)
        throw Error(ErrCode::invalid, "config field 'beta_true': must be nonempty");
    if (!is_stationary(phi_true))
        throw Error(ErrCode::invalid, "config field 'phi_true': non-stationary");
    if (!(sigma_true > 0.0))
        throw Error(ErrCode::invalid, "config field 'sigma_true': must be positive");
    if (replications < 1)
        throw Error(ErrCode::invalid, "config field 'replications': must be >= 1");
    if (burn_in < 0)
        throw Error(ErrCode::invalid, "config field 'burn_in': must be nonnegative");
    if (contamination.case_id < 1 || contamination.case_id > 3)
        throw Error(ErrCode::invalid, "config field 'contamination.case': must be I, II or III");
    if (contamination.rate < 0.0 || contamination.rate >= 0.5)
        throw Error(ErrCode::invalid, "config field 'contamination.rate': must lie in [0, 0.5)");
    if (!(contamination.outlier_sd > 0.0))
        throw Error(ErrCode::invalid, "config field 'contamination.outlier_sd': must be positive");
    if (methods.empty())
        throw Error(ErrCode::invalid, "config field 'methods': must be nonempty");
    for (const auto &m : methods)
        if (!m.auto_q && (!(m.q > 0.0) || m.q > 1.0 + kQUnity))
            throw Error(ErrCode::invalid, "config field 'methods.q': must lie in (0, 1]");
    for (double q : grid)
        if (!(q > 0.0) || q > 1.0 + kQUnity)
            throw Error(ErrCode::invalid, "config field 'grid': values must lie in (0, 1]");
    const int p = static_cast<int>(phi_true.size());
    const int M = static_cast<int>(beta_true.size());
    if (N < p + M + 2)
        throw Error(ErrCode::invalid, "config field 'N': too small for the design, need >= " +
                                          std::to_string(p + M + 2));
}

Rng::Rng(std::uint64_t seed) : eng_(seed) {}

Rng::Rng(std::uint64_t master, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(master),
                      static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    eng_.seed(seq);
}

double Rng::uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return r * std::cos(kTwoPi * u2);
}

int Rng::below(int n) {
    const auto un = static_cast<std::uint64_t>(n);
    const std::uint64_t bound = ~std::uint64_t(0) - ~std::uint64_t(0) % un;
    std::uint64_t x;
    do {
        x = eng_();
    } while (x >= bound);
    return static_cast<int>(x % un);
}

Dataset generate_dataset(const ScenarioConfig &cfg, Rng &rng) {
    const int M = static_cast<int>(cfg.beta_true.size());
    const int p = static_cast<int>(cfg.phi_true.size());
    Dataset d;
    d.X.resize(cfg.N, M);
    for (int t = 0; t < cfg.N; ++t)
        for (int i = 0; i < M; ++i)
            d.X(t, i) = rng.normal();
    const int total = cfg.burn_in + cfg.N;
    VectorXd e(total);
    for (int t = 0; t < total; ++t) {
        double s = cfg.sigma_true * rng.normal();
        for (int j = 1; j <= p && j <= t; ++j)
            s += cfg.phi_true(j - 1) * e(t - j);
        e(t) = s;
    }
    d.y = d.X * cfg.beta_true + e.tail(cfg.N);
    return d;
}

namespace {

// Indices of the first k entries of a partially shuffled 0..N-1.
std::vector<int> draw_rows(int N, int k, Rng &rng) {
    std::vector<int> idx(N);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + rng.below(N - i)]);
    idx.resize(k);
    return idx;
}

} // namespace

void contaminate(Dataset &d, const ContaminationSpec &spec, Rng &rng) {
    if (spec.case_id <= 1 || spec.rate <= 0.0)
        return;
    const int N = d.N();
    const int k = static_cast<int>(std::ceil(spec.rate * N - 1e-9));
    if (k == 0)
        return;
    const std::vector<int> y_rows = draw_rows(N, k, rng);
    for (int r : y_rows)
        d.y(r) = spec.outlier_mean + spec.outlier_sd * rng.normal();
    if (spec.case_id < 3)
        return;
    const std::vector<int> x_rows = spec.x_same_rows ? y_rows : draw_rows(N, k, rng);
    for (int r : x_rows) {
        if (spec.x_all_columns) {
            for (int j = 0; j < d.M(); ++j)
                d.X(r, j) = spec.outlier_mean + spec.outlier_sd * rng.normal();
        } else {
            d.X(r, 0) = spec.outlier_mean + spec.outlier_sd * rng.normal();
        }
    }
}

namespace {

std::optional<RepRecord> run_replication_method(const Dataset &data,
                                                const ScenarioConfig &cfg,
                                                const MethodSpec &m, int rep) {
    const int p = static_cast<int>(cfg.phi_true.size());
    try {
        FitResult fit;
        double q_used = m.q;
        if (m.auto_q) {
            const std::vector<double> grid =
                cfg.grid.empty() ? default_q_grid() : cfg.grid;
            QSearchResult sq = select_q(data, p, grid, cfg.control);
            fit = std::move(sq.fit);
            q_used = sq.q_star;
        } else {
            fit = ira_fit(data, p, m.q, cfg.control);
        }
        if (!fit.converged || fit.degenerate)
            return std::nullopt;
        const Asymptotics asym = asymptotic_report(data, fit, cfg.control.level);
        RepRecord rec;
        rec.rep = rep;
        rec.q = q_used;
        rec.estimates = asym.estimates;
        rec.se = asym.se;
        rec.se(rec.se.size() - 1) = asym.se_sigma;
        rec.ci_lower = asym.ci_lower;
        rec.ci_upper = asym.ci_upper;
        return rec;
    } catch (const Error &) {
        return std::nullopt;
    }
}

} // namespace

MonteCarloReport run_study(const ScenarioConfig &cfg, int jobs) {
    cfg.validate();
    const int R = cfg.replications;
    const int nm = static_cast<int>(cfg.methods.size());
    std::vector<std::vector<std::optional<RepRecord>>> cells(
        nm, std::vector<std::optional<RepRecord>>(R));

    auto worker_body = [&](int rep) {
        Rng rng(cfg.seed, static_cast<std::uint64_t>(rep));
        Dataset data = generate_dataset(cfg, rng);
        contaminate(data, cfg.contamination, rng);
        for (int m = 0; m < nm; ++m)
            cells[m][rep] = run_replication_method(data, cfg, cfg.methods[m], rep);
    };

    if (jobs <= 1) {
        for (int rep = 0; rep < R; ++rep)
            worker_body(rep);
    } else {
        std::atomic<int> next{0};
        auto pump = [&]() {
            for (int rep = next.fetch_add(1); rep < R; rep = next.fetch_add(1))
                worker_body(rep);
        };
        std::vector<std::thread> pool;
        const int nt = std::min(jobs, R);
        pool.reserve(nt);
        for (int i = 0; i < nt; ++i)
            pool.emplace_back(pump);
        for (auto &t : pool)
            t.join();
    }

    const int M = static_cast<int>(cfg.beta_true.size());
    const int p = static_cast<int>(cfg.phi_true.size());
    const int dim = M + p + 1;
    VectorXd truth(dim);
    truth.head(M) = cfg.beta_true;
    truth.segment(M, p) = cfg.phi_true;
    truth(dim - 1) = cfg.sigma_true;

    MonteCarloReport report;
    for (int m = 0; m < nm; ++m) {
        MethodReport mr;
        mr.spec = cfg.methods[m];
        for (int rep = 0; rep < R; ++rep) {
            if (cells[m][rep])
                mr.reps.push_back(*cells[m][rep]);
            else
                ++mr.failures;
        }
        const int used = static_cast<int>(mr.reps.size());
        mr.params.resize(dim);
        for (int i = 0; i < dim; ++i) {
            ParamSummary &ps = mr.params[i];
            if (i < M)
                ps.name = "beta" + std::to_string(i + 1);
            else if (i < M + p)
                ps.name = "phi" + std::to_string(i - M + 1);
            else
                ps.name = "sigma";
            ps.truth = truth(i);
            if (used == 0)
                continue;
            double sum = 0.0, sumsq_err = 0.0, sum_se = 0.0, sum_lo = 0.0, sum_hi = 0.0;
            for (const auto &rec : mr.reps) {
                sum += rec.estimates(i);
                const double err = rec.estimates(i) - truth(i);
                sumsq_err += err * err;
                sum_se += rec.se(i);
                sum_lo += rec.ci_lower(i);
                sum_hi += rec.ci_upper(i);
            }
            ps.mean = sum / used;
            ps.bias = ps.mean - ps.truth;
            ps.rmse = std::sqrt(sumsq_err / used);
            ps.mean_se = sum_se / used;
            ps.ci_lower_mean = sum_lo / used;
            ps.ci_upper_mean = sum_hi / used;
            if (used > 1) {
                double ss = 0.0;
                for (const auto &rec : mr.reps) {
                    const double dlt = rec.estimates(i) - ps.mean;
                    ss += dlt * dlt;
                }
                ps.sd = std::sqrt(ss / (used - 1));
            }
        }
        if (used > 0) {
            double qs = 0.0;
            for (const auto &rec : mr.reps)
                qs += rec.q;
            mr.mean_q = qs / used;
        }
        report.methods.push_back(std::move(mr));
    }
    return report;
}

} // namespace arq
