#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "ssmdelay/ssm.hpp"

namespace ssmdelay {

/// Codimension-one section in reduced space: points with
/// normal . (eta - base) = 0, crossed with sign `orientation` of the flow
/// derivative. `direction` (unit, orthogonal to normal) carries the
/// in-section coordinate.
struct PoincareSection {
    Eigen::VectorXd base;
    Eigen::VectorXd normal;
    Eigen::VectorXd direction;
    int orientation = +1;

    static PoincareSection default_for(int d);
    Eigen::VectorXd point(double x) const { return base + x * direction; }
    double coordinate(const Eigen::VectorXd& eta) const {
        return direction.dot(eta - base);
    }
};

struct PoincareReturn {
    Eigen::VectorXd eta;  // crossing point
    double x;             // in-section coordinate
    double time;          // return time
};

struct PoincareOptions {
    double step = 0.0;        // 0: auto from the model's rotation rate
    double max_time = 0.0;    // 0: auto (10 typical periods)
    double section_tol = 1e-10;
};

/// First same-orientation return of the reduced flow from a point on the
/// section. Crossing time located by bisection; throws NumericError when no
/// return occurs within max_time.
PoincareReturn poincare_map(const SSMModel& model, const PoincareSection& section,
                            double x0, const PoincareOptions& opts = {});

struct LimitCycle {
    double x;            // section coordinate of the map fixed point
    double map_slope;    // P'(x)
    bool stable;         // |P'| < 1
    double return_time;
};

struct CycleSearchOptions {
    PoincareOptions poincare;
    double min_amplitude = 1e-3;  // fixed points closer to 0 are the equilibrium
    double newton_tol = 1e-9;
    int max_newton = 25;
    double dedup_tol = 1e-6;
};

/// Newton on P(x) - x from each seed with finite-difference P'.
std::vector<LimitCycle> find_limit_cycles(const SSMModel& model,
                                          const PoincareSection& section,
                                          const std::vector<double>& seeds,
                                          const CycleSearchOptions& opts = {});

/// Parameter-indexed SSM family. Node models are gauge-aligned at
/// construction (orthogonal Procrustes on the tangent bases, with the
/// polynomial coefficients recomposed accordingly).
class ParametricSSM {
public:
    enum class Scheme { Linear, CubicSpline };

    static ParametricSSM create(std::vector<double> nodes,
                                std::vector<SSMModel> models,
                                Scheme scheme = Scheme::Linear);

    /// Coefficient interpolation at mu (inside the node hull; no
    /// extrapolation). The interpolated tangent basis is re-orthonormalized
    /// and the manifold coefficients re-projected to its complement.
    SSMModel at(double mu) const;

    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<SSMModel>& models() const { return models_; }
    Scheme scheme() const { return scheme_; }

private:
    std::vector<double> nodes_;
    std::vector<SSMModel> models_;  // aligned
    Scheme scheme_ = Scheme::Linear;

    Eigen::MatrixXd interp_matrix(const std::function<Eigen::MatrixXd(int)>& get,
                                  double mu) const;
};

struct BifurcationPoint {
    double mu;
    std::vector<LimitCycle> cycles;
};

struct BifurcationDiagram {
    std::vector<BifurcationPoint> points;
    std::vector<double> folds;  // refined fold parameters
    std::vector<double> gaps;   // grid points where tracking failed
};

struct FoldScanOptions {
    CycleSearchOptions search;
    double refine_tol = 1e-4;
    int default_seed_count = 20;
    double seed_radius = 1.0;
};

/// Limit-cycle census over a parameter grid with continuation seeding; a
/// change of the cycle count by two brackets a fold, refined by bisection on
/// pair existence.
BifurcationDiagram fold_scan(const ParametricSSM& family,
                             const PoincareSection& section,
                             const std::vector<double>& grid,
                             const FoldScanOptions& opts = {});

/// Fold scan over an abstract 1D map family (the Poincare-map machinery
/// without the flow); used for analytic normal forms and by fold_scan.
struct MapFixedPoint {
    double x;
    double deriv;
    bool stable;
};

std::vector<MapFixedPoint> map_fixed_points(
    const std::function<double(double)>& map, const std::vector<double>& seeds,
    double min_amplitude = 0.0, double newton_tol = 1e-10, double dedup_tol = 1e-6);

struct MapFoldScan {
    std::vector<double> grid;
    std::vector<std::vector<MapFixedPoint>> points;
    std::vector<double> folds;
};

MapFoldScan fold_scan_map_family(
    const std::function<std::function<double(double)>(double)>& family,
    const std::vector<double>& grid, const std::vector<double>& seeds,
    double refine_tol = 1e-4, double min_amplitude = 0.0);

/// Mean of ||R(-eta) + R(eta)|| over sample points: the odd-symmetry defect
/// of a reduced field (reported, not asserted).
double odd_symmetry_defect(const SSMModel& model,
                           const std::vector<Eigen::VectorXd>& samples);

}  // namespace ssmdelay
