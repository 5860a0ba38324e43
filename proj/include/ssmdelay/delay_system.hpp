#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ssmdelay {

/// Right-hand side of an autonomous DDE with discrete and/or distributed
/// delays:
///
///   xdot(t) = rhs(t, x(t), [x(t - tau_j)]_j, I(t)),
///   I(t)    = int_0^s kernel(theta) x(t - theta) dtheta   (when distributed).
///
/// Systems driven by a digital controller carry `periodic_delay` instead and
/// split the field into drift + sampled control, see simulate_digital().
struct DelaySystem {
    using Rhs = std::function<void(double t, const Eigen::VectorXd& y,
                                   const std::vector<Eigen::VectorXd>& delayed,
                                   const Eigen::VectorXd& distributed,
                                   Eigen::VectorXd& out)>;
    using Field = std::function<void(const Eigen::VectorXd& y, Eigen::VectorXd& out)>;

    struct Distributed {
        double support = 0.0;                    // kernel lives on [0, support]
        std::function<double(double)> kernel;    // scalar weight at lag theta
        bool constant_kernel = false;            // kernel == kernel(0) on [0, support]
    };

    struct PeriodicDelay {
        double sample_dt = 0.0;  // ZOH sampling period
        int hold_multiplier = 0; // feedback delay r in units of sample_dt
    };

    int n = 0;
    double tau_max = 0.0;
    std::vector<double> discrete_delays;  // each in (0, tau_max]
    Rhs rhs;
    std::optional<Distributed> distributed;
    std::map<std::string, double> params;

    std::optional<PeriodicDelay> periodic_delay;
    Field drift;    // uncontrolled field f(x), periodic-delay systems only
    Field control;  // controller g(v) applied to the held, quantized state

    Eigen::VectorXd eval_rhs(double t, const Eigen::VectorXd& y,
                             const std::vector<Eigen::VectorXd>& delayed,
                             const Eigen::VectorXd& distributed_value) const {
        Eigen::VectorXd out(n);
        rhs(t, y, delayed, distributed_value, out);
        return out;
    }
};

}  // namespace ssmdelay
