#pragma once

#include <Eigen/Dense>

#include "ssmdelay/delay_system.hpp"
#include "ssmdelay/history.hpp"
#include "ssmdelay/trajectory.hpp"

namespace ssmdelay {

/// Output of one method-of-steps run. `final_history` is the trailing
/// [t_end - tau, t_end] segment (values and node derivatives), suitable for
/// restarting a run.
struct SimulationResult {
    Trajectory trajectory;       // samples on [0, t_end] at the snapped step
    HistorySpec final_history;   // sampled segment ending at t_end
    double dt = 0.0;             // snapped step actually used
};

/// Largest step <= dt_request that divides all entries of `constraints` to
/// 1e-12 relative. Throws ConfigError when no such step exists.
double snap_step(double dt_request, const std::vector<double>& constraints);

/// Integrates an autonomous DDE by the method of steps: classical RK4 per
/// step, delayed arguments read from cubic-Hermite dense output over the
/// stored history. Distributed terms, when present, are evaluated by
/// composite trapezoid on the solver grid.
///
/// Throws DivergedError when |x|_inf exceeds 1e8, ConfigError on
/// incommensurable steps or history/dimension mismatches.
SimulationResult simulate(const DelaySystem& system, const HistorySpec& history,
                          double t_end, double dt_request);

/// simulate() for systems with a distributed kernel; checks the kernel is
/// present.
SimulationResult simulate_distributed(const DelaySystem& system,
                                      const HistorySpec& history, double t_end,
                                      double dt_request);

/// Closed loop of a periodically sampled digital controller. The control
/// input is recomputed at t = j*sample_dt from the state at t - r*sample_dt,
/// quantized to `quantizer_resolution` (0 disables quantization), and held
/// constant over the sampling interval (ZOH).
SimulationResult simulate_digital(const DelaySystem& system,
                                  double quantizer_resolution,
                                  const HistorySpec& history, double t_end,
                                  double dt_request);

/// Subsamples at t = phase + j*period. `period` must be a multiple of
/// traj.dt; the result has dt = period.
Trajectory stroboscopic_sample(const Trajectory& traj, double period,
                               double phase);

/// Round-to-resolution quantizer; identity for resolution <= 0.
inline double quantize(double v, double resolution) {
    if (resolution <= 0.0) return v;
    return resolution * std::round(v / resolution);
}

}  // namespace ssmdelay
