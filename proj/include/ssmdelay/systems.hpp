#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ssmdelay/delay_system.hpp"

namespace ssmdelay {

using ParamMap = std::map<std::string, double>;

/// One ready-made benchmark DDE. `equilibrium` is the anchor fixed point in
/// the coordinates the builder uses (pre-shifted to the origin where the
/// source does so).
struct SystemCatalogEntry {
    std::string name;
    ParamMap default_params;
    std::function<DelaySystem(const ParamMap&)> builder;
    std::function<Eigen::VectorXd(const ParamMap&)> equilibrium;
};

const std::vector<SystemCatalogEntry>& system_catalog();

/// Builds a catalog system with parameter overrides. Unknown names or
/// parameters raise CatalogError.
DelaySystem build_system(const std::string& name, const ParamMap& overrides = {});

Eigen::VectorXd system_equilibrium(const std::string& name,
                                   const ParamMap& overrides = {});

ParamMap resolved_params(const std::string& name, const ParamMap& overrides = {});

/// |rhs| at the constant equilibrium history (distributed integral included).
double equilibrium_residual(const DelaySystem& system, const Eigen::VectorXd& eq);

/// Scalar digitally controlled toy, xdot = a x - p_gain q(x(t - rho(t))) with
/// ZOH sampling period `sample_dt`, feedback delay r, and round-to-resolution
/// quantizer q. Open-loop unstable for a > 0.
DelaySystem micro_chaos_toy(double a, double p_gain, double resolution,
                            double sample_dt, int r);

/// Exact stroboscopic map of the toy:
///   x_{j+1} = e^{a dt} x_j - (p_gain/a)(e^{a dt} - 1) q(x_{j-r}).
/// Iterates `steps` times from constant pre-history x0; the returned orbit
/// has steps+1 entries starting at x0.
std::vector<double> micro_chaos_exact_orbit(double a, double p_gain,
                                            double resolution, double sample_dt,
                                            int r, double x0, int steps);

/// Traffic range policy: 0 below h_stop, v_max above h_go, smooth cosine ramp
/// in between.
double traffic_range_policy(double h, double h_stop, double h_go, double v_max);

/// Headway h* with V(h*) = v_ref, solved by bisection on the ramp.
double traffic_equilibrium_headway(double v_ref, double h_stop, double h_go,
                                   double v_max);

}  // namespace ssmdelay
