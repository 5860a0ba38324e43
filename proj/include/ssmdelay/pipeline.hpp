#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ssmdelay/chaos.hpp"
#include "ssmdelay/embedding.hpp"
#include "ssmdelay/parametric.hpp"
#include "ssmdelay/solver.hpp"
#include "ssmdelay/ssm.hpp"
#include "ssmdelay/systems.hpp"

namespace ssmdelay::pipeline {

/// Deterministic generator (splitmix64) so seeded runs are bit-reproducible
/// across platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}
    uint64_t next();
    double uniform(double lo, double hi);
    Eigen::VectorXd in_ball(const Eigen::VectorXd& center, double radius);

private:
    uint64_t state_;
};

struct DataSpec {
    std::string system;
    ParamMap overrides;
    double dt = 0.01;
    double t_end = 60.0;
    std::vector<Eigen::VectorXd> initial_histories;  // constant histories
};

std::vector<Trajectory> generate_trajectories(const DataSpec& spec);

enum class DynamicsKind { Poly, Rbf };

struct FitSpec {
    EmbeddingConfig embedding;
    int d = 2;
    int man_order = 3;
    int dyn_order = 5;
    double ridge = 0.0;
    DynamicsKind kind = DynamicsKind::Poly;
    int rbf_stride = 1;
    int rbf_max_centers = 1500;
    int fit_row_stride = 1;  // regressions use every s-th embedded row
};

/// Embed, fit geometry, estimate derivatives where needed, fit dynamics.
SSMModel fit_model(const std::vector<Trajectory>& training, const FitSpec& spec,
                   const Eigen::VectorXd& anchor, FitDiagnostics* diag = nullptr);

/// Grid search over (man_order, dyn_order) minimizing the mean test NMTE.
struct OrderSweepResult {
    int man_order = 0;
    int dyn_order = 0;
    double nmte = 0.0;
};
OrderSweepResult sweep_orders(const std::vector<Trajectory>& training,
                              const std::vector<Trajectory>& tests,
                              const FitSpec& base, const Eigen::VectorXd& anchor,
                              const std::vector<int>& man_orders,
                              const std::vector<int>& dyn_orders);

std::vector<PredictionReport> predict_tests(const SSMModel& model,
                                            const std::vector<Trajectory>& tests);
double mean_nmte(const std::vector<PredictionReport>& reports);

/// Reduced-coordinate traces of trajectories under a model (projection only).
Eigen::MatrixXd reduced_traces(const SSMModel& model,
                               const std::vector<Trajectory>& trajectories);

/// Iterates the model's reduced dynamics from eta0 and returns the reduced
/// orbit (rows). `dt` is one advance step (ignored for RBF maps).
Eigen::MatrixXd reduced_orbit(const SSMModel& model, const Eigen::VectorXd& eta0,
                              int steps, double dt);

/// Leading-Lyapunov driver for the full DDE: burn in to the attractor, then
/// launch `count` constant-history initial conditions in an eps-ball around
/// the reached state and compare embedded trajectories pairwise.
LyapunovFit lyapunov_full_dde(const DelaySystem& system,
                              const Eigen::VectorXd& burnin_history,
                              double burn_in, int count, double eps,
                              double horizon, double dt,
                              const EmbeddingConfig& embedding, uint64_t seed);

/// Same estimate on the reduced model: perturb in an eps-ball in reduced
/// coordinates around eta_anchor, advect, lift, compare in embedding space.
LyapunovFit lyapunov_reduced_model(const SSMModel& model,
                                   const Eigen::VectorXd& eta_anchor, int count,
                                   double eps, double horizon, uint64_t seed);

/// Largest pairwise distance of (a subsample of) the rows.
double cloud_diameter(const Eigen::MatrixXd& rows, int cap = 2000);

}  // namespace ssmdelay::pipeline
