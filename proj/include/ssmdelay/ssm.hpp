#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ssmdelay/embedding.hpp"
#include "ssmdelay/poly_basis.hpp"
#include "ssmdelay/trajectory.hpp"

namespace ssmdelay {

/// Polynomial reduced vector field etadot = R m(eta), degrees 1..K.
struct PolyField {
    MultiIndexBasis basis;
    Eigen::MatrixXd R;  // d x basis.size()
};

/// RBF discrete map eta_{n+1} = sum_i w_i ||eta - c_i|| (linear kernel).
struct RBFMap {
    Eigen::MatrixXd centers;  // M x d
    Eigen::MatrixXd weights;  // M x d
};

/// SSM in delay-embedding coordinates: orthonormal tangent basis V1,
/// polynomial graph coefficients V_nl over degrees 2..K_man (columns
/// orthogonal to V1), plus the learned reduced dynamics.
struct SSMModel {
    int k = 0;
    int d = 0;
    Eigen::MatrixXd V1;          // k x d, V1^T V1 = I
    MultiIndexBasis man_basis;   // degrees 2..K_man (size 0 for linear manifolds)
    Eigen::MatrixXd V_nl;        // k x man_basis.size()
    std::variant<std::monostate, PolyField, RBFMap> dynamics;
    double dt_model = 0.0;       // step of the discrete map / sample step
    EmbeddingConfig embedding;
    Eigen::VectorXd anchor;      // fixed-point location in embedding space

    bool has_polyfield() const { return std::holds_alternative<PolyField>(dynamics); }
    bool has_rbf() const { return std::holds_alternative<RBFMap>(dynamics); }
    const PolyField& polyfield() const { return std::get<PolyField>(dynamics); }
    const RBFMap& rbf() const { return std::get<RBFMap>(dynamics); }

    Eigen::VectorXd reduce(const Eigen::VectorXd& y) const;
    Eigen::VectorXd lift(const Eigen::VectorXd& eta) const;
    Eigen::VectorXd field(const Eigen::VectorXd& eta) const;  // PolyField only
    Eigen::VectorXd map_step(const Eigen::VectorXd& eta) const;  // RBF only
    /// One dt of reduced evolution (RK4 on the field, or the RBF map).
    Eigen::VectorXd advance(const Eigen::VectorXd& eta, double dt) const;
};

struct FitDiagnostics {
    double objective = 0.0;
    int iterations = 0;
    bool ridge_fallback = false;
    double condition = 0.0;
};

/// Alternating-projection fit of the manifold geometry: V1 from the top-d
/// singular directions, V_nl by least squares in the orthogonal complement,
/// V1 re-fit on residual-corrected data until the graph objective stalls.
SSMModel fit_manifold(const EmbeddedData& data, int d, int order,
                      const Eigen::VectorXd& anchor,
                      FitDiagnostics* diag = nullptr);

/// Least-squares polynomial regression of the reduced field on (eta, etadot)
/// samples; optional ridge. Ill-conditioned normal equations fall back to a
/// 1e-8 ridge once, then fail.
void fit_polyfield(SSMModel& model, const EmbeddedData& data, int order,
                   double ridge = 0.0, FitDiagnostics* diag = nullptr);

/// RBF interpolation of consecutive reduced pairs (eta_n, eta_{n+stride});
/// kernel matrix gets a 1e-10 Tikhonov diagonal, duplicate centers are
/// removed, and at most max_centers training pairs are kept (strided).
void fit_rbf(SSMModel& model, const EmbeddedData& data, int pair_stride = 1,
             int max_centers = 1500);

struct PredictionReport {
    double nmte = 0.0;
    bool diverged = false;
    std::vector<double> times;
    Eigen::MatrixXd test_rows;     // embedded test trajectory
    Eigen::MatrixXd model_rows;    // lifted prediction at the same times
    Eigen::MatrixXd reduced_test;  // projections of the test rows
    Eigen::MatrixXd reduced_model;
};

/// Projects the test's first embedded row, advects under the reduced
/// dynamics, lifts, and scores the normalized mean trajectory error
///   NMTE = sum_j ||y_test - y_model|| / (N_p max_j ||y_test||).
PredictionReport predict(const SSMModel& model, const Trajectory& test);

/// Eigenvalues of the reduced linear part; discrete maps return
/// log(eig DF(0))/dt_model.
std::vector<std::complex<double>> model_eigenvalues(const SSMModel& model);

void save_model_json(const SSMModel& model, const std::string& path);
SSMModel load_model_json(const std::string& path);

}  // namespace ssmdelay
