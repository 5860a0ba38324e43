#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ssmdelay/trajectory.hpp"

namespace ssmdelay {

/// Delay-coordinate embedding configuration. `observable` lists the observed
/// state components (channels); the embedded row stacks all channels at each
/// of the k/|observable| lags. Takens' bound k > 2d is checked at fit time
/// unless `allow_low_embedding` is set.
struct EmbeddingConfig {
    std::vector<int> observable = {0};
    int k = 5;
    int lag_steps = 1;
    double skip_time = 0.0;  // initial transient dropped before embedding
    bool allow_low_embedding = false;

    int channels() const { return static_cast<int>(observable.size()); }
    int lags() const { return k / std::max(1, channels()); }
};

/// Rows of delay-embedded observables with provenance (source trajectory and
/// row time). Row i of segment s stacks the observable at times
/// t_i, t_i + lag, ..., t_i + (lags-1) lag.
struct EmbeddedData {
    Eigen::MatrixXd Y;
    Eigen::MatrixXd dY;  // empty until estimate_derivatives
    std::vector<int> traj_id;
    std::vector<double> row_time;
    std::vector<std::pair<int, int>> segments;  // [begin, end) row ranges
    double dt = 0.0;
    int skipped_trajectories = 0;
    EmbeddingConfig config;

    int rows() const { return static_cast<int>(Y.rows()); }
    int k() const { return static_cast<int>(Y.cols()); }
    bool has_derivatives() const { return dY.size() > 0; }
};

/// Embeds each trajectory separately; boundaries are never straddled.
/// Trajectories too short for one row are skipped (counted); all skipped is
/// a ConfigError.
EmbeddedData embed(const std::vector<Trajectory>& trajectories,
                   const EmbeddingConfig& cfg);

/// Embeds a single row at the start of `traj` (for prediction seeds).
Eigen::VectorXd embed_row(const Trajectory& traj, const EmbeddingConfig& cfg,
                          int start_index = 0);

/// 4th-order finite-difference time derivatives of the embedded rows,
/// per trajectory segment (central interior, one-sided at edges).
void estimate_derivatives(EmbeddedData& data);

/// RMS distance of the rows to span{v_0..v_m}, v_l = (0^l, 1^l, ..., (k-1)^l),
/// by orthogonal projection.
double flatten_order(const EmbeddedData& data, int m);

/// Shared stencils, exposed for reuse: derivative of uniformly sampled rows.
Eigen::MatrixXd fd4_matrix_derivative(const Eigen::MatrixXd& y, double dt);

/// Writes rows as CSV with provenance columns (traj_id, t, y1..yk).
void write_embedded_csv(const EmbeddedData& data, const std::string& path);

}  // namespace ssmdelay
