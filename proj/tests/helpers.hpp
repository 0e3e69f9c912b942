#pragma once

#include "csv.hpp"
#include "fit.hpp"
#include "inference.hpp"
#include "model.hpp"
#include "qselect.hpp"
#include "report.hpp"
#include "simulate.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace testutil {

using arq::Dataset;
using arq::MatrixXd;
using arq::Params;
using arq::Rng;
using arq::VectorXd;

inline std::filesystem::path scratch_dir() {
    static const std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() /
                 ("arq_scratch_" + std::to_string(::getpid()));
        std::filesystem::create_directories(d);
        return d;
    }();
    return dir;
}

inline std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

inline void spit(const std::filesystem::path &p, const std::string &text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

inline CliRun run_cli(const std::string &args) {
    static int counter = 0;
    const auto out_path = scratch_dir() / ("cli_out_" + std::to_string(++counter));
    const auto err_path = scratch_dir() / ("cli_err_" + std::to_string(counter));
    const std::string cmd = std::string(ARQ_CLI_PATH) + " " + args + " > " +
                            out_path.string() + " 2> " + err_path.string();
    const int raw = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

inline VectorXd random_stationary_phi(Rng &rng, int p) {
    if (p == 0)
        return VectorXd(0);
    for (;;) {
        VectorXd phi(p);
        for (int i = 0; i < p; ++i)
            phi(i) = (2.0 * rng.uniform() - 1.0) * 0.9 / p;
        if (arq::is_stationary(phi))
            return phi;
    }
}

struct Instance {
    Dataset data;
    Params truth;
};

inline Instance make_instance(std::uint64_t seed, int N, int M, int p,
                              double sigma = 1.0) {
    Rng rng(seed);
    arq::ScenarioConfig cfg;
    cfg.N = N;
    cfg.burn_in = 300;
    cfg.sigma_true = sigma;
    cfg.beta_true.resize(M);
    for (int i = 0; i < M; ++i)
        cfg.beta_true(i) = 4.0 * rng.uniform() - 2.0;
    cfg.phi_true = random_stationary_phi(rng, p);
    Instance inst;
    inst.data = arq::generate_dataset(cfg, rng);
    inst.truth.beta = cfg.beta_true;
    inst.truth.phi = cfg.phi_true;
    inst.truth.sigma2 = sigma * sigma;
    return inst;
}

template <typename F> VectorXd fd_gradient(F f, const VectorXd &theta) {
    VectorXd g(theta.size());
    for (int i = 0; i < theta.size(); ++i) {
        const double h = 1e-6 * (1.0 + std::abs(theta(i)));
        VectorXd tp = theta, tm = theta;
        tp(i) += h;
        tm(i) -= h;
        g(i) = (f(tp) - f(tm)) / (2.0 * h);
    }
    return g;
}

template <typename F> MatrixXd fd_jacobian(F f, const VectorXd &theta) {
    const VectorXd f0 = f(theta);
    MatrixXd J(f0.size(), theta.size());
    for (int i = 0; i < theta.size(); ++i) {
        const double h = 1e-6 * (1.0 + std::abs(theta(i)));
        VectorXd tp = theta, tm = theta;
        tp(i) += h;
        tm(i) -= h;
        J.col(i) = (f(tp) - f(tm)) / (2.0 * h);
    }
    return J;
}

// max_ij |got - want| / (1 + |want|)
inline double max_rel_err(const MatrixXd &got, const MatrixXd &want) {
    double m = 0.0;
    for (int i = 0; i < got.rows(); ++i)
        for (int j = 0; j < got.cols(); ++j)
            m = std::max(m, std::abs(got(i, j) - want(i, j)) /
                                (1.0 + std::abs(want(i, j))));
    return m;
}

class Timer {
  public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

inline std::string belgium_path() {
    return std::string(ARQ_DATA_DIR) + "/belgium_calls.csv";
}

inline std::string config_path(const char *name) {
    return std::string(ARQ_CONFIG_DIR) + "/" + name;
}

} // namespace testutil
