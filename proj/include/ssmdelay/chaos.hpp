#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ssmdelay {

/// Correlation-integral fit C(l) ~ l^m over an automatically selected
/// scaling window.
struct CorrDimFit {
    std::vector<double> radii;
    std::vector<double> corr;      // C(l), pairwise counts / N^2
    int window_lo = 0;             // inclusive point range of the slope fit
    int window_hi = 0;
    double slope = 0.0;
    double slope_stderr = 0.0;
    bool window_stable = true;
    int points_used = 0;
};

/// Grassberger-Procaccia estimator on a point cloud (rows = points). The
/// pairwise count is exact on at most `subsample_cap` points (strided
/// subsampling beyond). The scaling window is the longest run of >= 5
/// consecutive radii whose local log-log slopes stay within 15% of the run
/// mean; pass window indices to override.
CorrDimFit correlation_dimension(const Eigen::MatrixXd& points, int radii_count = 40,
                                 int window_lo = -1, int window_hi = -1,
                                 int subsample_cap = 8000);

/// Smallest even integer d with d > 2m.
int embedding_dimension_rule(double m);

struct LyapunovFit {
    std::vector<double> times;
    std::vector<double> mean_normalized;  // mean of delta_ij(t)/delta_ij(0)
    std::vector<double> mean_raw;
    int fit_points = 0;
    double lambda = 0.0;  // 1/seconds
    double r_squared = 0.0;
};

/// Leading Lyapunov exponent from an ensemble of trajectories given as
/// aligned embedding-space rows (one T x k matrix per ensemble member).
/// The fit window runs from t = 0 until the mean separation first exceeds
/// 10% of `attractor_diameter`.
LyapunovFit lyapunov_from_ensemble(const std::vector<Eigen::MatrixXd>& members,
                                   double dt, double attractor_diameter);

struct PdfReport {
    int bins = 0;
    std::vector<std::pair<double, double>> ranges;  // per coordinate
    std::vector<Eigen::VectorXd> hist_a, hist_b;    // normalized to sum 1
    std::vector<double> l1;                         // per-coordinate distance
    double max_l1 = 0.0;
};

/// Per-coordinate histogram comparison on shared Freedman-Diaconis bins over
/// the union range (`bins` = 0 selects automatically).
PdfReport pdf_compare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      int bins = 0);

}  // namespace ssmdelay
