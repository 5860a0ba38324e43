#pragma once

#include <Eigen/Dense>
#include <string>

namespace ssmdelay {

/// Uniformly sampled multivariate time series. Row i holds the state at
/// t0 + i*dt exactly.
struct Trajectory {
    double t0 = 0.0;
    double dt = 0.0;
    Eigen::MatrixXd samples;  // N x n

    int size() const { return static_cast<int>(samples.rows()); }
    int dim() const { return static_cast<int>(samples.cols()); }
    double time(int i) const { return t0 + i * dt; }
    double t_end() const { return time(size() - 1); }

    /// Throws ConfigError on shape or finiteness violations.
    void validate() const;
};

/// Writes header `t,x1,...,xn` and one `%.12e`-formatted row per sample.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

/// Reads a file produced by write_trajectory_csv. Round-trips bit-identically
/// at %.12e precision.
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace ssmdelay
