#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace arq {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ErrCode {
    invalid = 3,
    singular = 4,
    degenerate_weights = 5,
    no_valid_q = 6,
    inference_unavailable = 7,
};

class Error : public std::runtime_error {
  public:
    ErrCode code;
    Error(ErrCode c, const std::string &msg) : std::runtime_error(msg), code(c) {}
};

struct Dataset {
    VectorXd y; // length N, time order
    MatrixXd X; // N x M
    int N() const { return static_cast<int>(y.size()); }
    int M() const { return static_cast<int>(X.cols()); }
    void validate(int p) const;
};

struct Params {
    VectorXd beta;
    VectorXd phi;
    double sigma2 = 1.0;
    int M() const { return static_cast<int>(beta.size()); }
    int p() const { return static_cast<int>(phi.size()); }
    int dim() const { return M() + p() + 1; }
    VectorXd flat() const;
    static Params from_flat(const VectorXd &v, int M, int p);
};

struct Control {
    double epsilon = 1e-8;
    int max_iter = 500;
    double level = 0.95;
    bool trace = false;
};

inline constexpr double kWeightFloor = 1e-300;
inline constexpr double kStationarityTol = 1e-8;
// |1 - q| below this is evaluated on the q = 1 (logarithmic) branch.
inline constexpr double kQUnity = 1e-10;
// Reciprocal condition number below which a penalty/information matrix is
// treated as singular.
inline constexpr double kRcondMin = 1e-12;

} // namespace arq
