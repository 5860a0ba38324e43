#include "ssmdelay/solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ssmdelay/errors.hpp"

namespace ssmdelay {

namespace {

constexpr double kBlowupThreshold = 1e8;

/// Node storage for the dense solution over [-tau, t]. Each grid cell
/// [t_i, t_i+1] is interpolated by the cubic Hermite through its endpoint
/// values and one-sided derivatives; only the junction t = 0 ever has
/// distinct left/right derivatives (the inherent DDE derivative jump).
class DenseHistory {
public:
    DenseHistory(double t_base, double dt, int n)
        : t_base_(t_base), dt_(dt), n_(n) {}

    void push(const Eigen::VectorXd& x, const Eigen::VectorXd& f_left,
              const Eigen::VectorXd& f_right) {
        if (!xs_.empty())
            cum_.push_back(cum_.back() + 0.5 * dt_ * (xs_.back() + x));
        else
            cum_.push_back(Eigen::VectorXd::Zero(n_));
        xs_.push_back(x);
        fl_.push_back(f_left);
        fr_.push_back(f_right);
    }

    void set_right_derivative(int i, const Eigen::VectorXd& f) { fr_[i] = f; }

    int nodes() const { return static_cast<int>(xs_.size()); }
    double node_time(int i) const { return t_base_ + i * dt_; }
    const Eigen::VectorXd& node_value(int i) const { return xs_[i]; }
    const Eigen::VectorXd& node_deriv_left(int i) const { return fl_[i]; }

    void eval_into(double t, Eigen::VectorXd& out) const {
        const double s = (t - t_base_) / dt_;
        int cell = static_cast<int>(std::floor(s));
        cell = std::clamp(cell, 0, nodes() - 2);
        double u = s - cell;
        // Snap to nodes: avoids interpolating across the junction when the
        // lookup lands on a grid point up to roundoff.
        if (u < 1e-9) {
            out = xs_[cell];
            return;
        }
        if (u > 1.0 - 1e-9) {
            out = xs_[cell + 1];
            return;
        }
        const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
        const double h10 = u * (1 - u) * (1 - u);
        const double h01 = u * u * (3 - 2 * u);
        const double h11 = u * u * (u - 1);
        out = h00 * xs_[cell] + (h10 * dt_) * fr_[cell] + h01 * xs_[cell + 1] +
              (h11 * dt_) * fl_[cell + 1];
    }

    Eigen::VectorXd eval(double t) const {
        Eigen::VectorXd out(n_);
        eval_into(t, out);
        return out;
    }

    /// Composite-trapezoid cumulative integral of the stored solution from
    /// t_base to t, the trailing partial cell closed with `x_at_t`.
    void cumulative_into(double t, const Eigen::VectorXd& x_at_t,
                         Eigen::VectorXd& out) const {
        const double s = (t - t_base_) / dt_;
        int cell = static_cast<int>(std::floor(s + 1e-9));
        cell = std::clamp(cell, 0, nodes() - 1);
        const double rem = t - node_time(cell);
        out = cum_[cell];
        if (rem > 1e-9 * dt_) out += (0.5 * rem) * (xs_[cell] + x_at_t);
    }

private:
    double t_base_;
    double dt_;
    int n_;
    std::vector<Eigen::VectorXd> xs_, fl_, fr_;
    std::vector<Eigen::VectorXd> cum_;
};

/// Fourth-order finite-difference derivatives of uniformly sampled rows.
Eigen::MatrixXd fd4_derivatives(const Eigen::MatrixXd& y, double dt) {
    const int n = static_cast<int>(y.rows());
    Eigen::MatrixXd d(n, y.cols());
    if (n < 5) {  // fall back to low order on very short segments
        for (int i = 0; i < n; ++i) {
            if (i == 0)
                d.row(i) = (y.row(1) - y.row(0)) / dt;
            else if (i == n - 1)
                d.row(i) = (y.row(n - 1) - y.row(n - 2)) / dt;
            else
                d.row(i) = (y.row(i + 1) - y.row(i - 1)) / (2 * dt);
        }
        return d;
    }
    for (int i = 0; i < n; ++i) {
        if (i >= 2 && i <= n - 3) {
            d.row(i) =
                (y.row(i - 2) - 8.0 * y.row(i - 1) + 8.0 * y.row(i + 1) - y.row(i + 2)) /
                (12.0 * dt);
        } else {
            const bool fwd = i < 2;
            const int o = fwd ? i : n - 1 - i;  // offset 0 or 1 from the edge
            const int b = fwd ? 0 : n - 5;      // stencil base
            const double sgn = fwd ? 1.0 : -1.0;
            auto row = [&](int m) { return y.row(fwd ? b + m : b + 4 - m); };
            if (o == 0)
                d.row(i) = sgn *
                           (-25.0 * row(0) + 48.0 * row(1) - 36.0 * row(2) +
                            16.0 * row(3) - 3.0 * row(4)) /
                           (12.0 * dt);
            else
                d.row(i) = sgn *
                           (-3.0 * row(0) - 10.0 * row(1) + 18.0 * row(2) -
                            6.0 * row(3) + row(4)) /
                           (12.0 * dt);
        }
    }
    return d;
}

struct HistoryGrid {
    Eigen::MatrixXd values;  // (M+1) x n over [-tau, 0]
    Eigen::MatrixXd derivs;
};

HistoryGrid sample_history(const HistorySpec& history, double tau, double dt, int n) {
    const int M = std::max(1, static_cast<int>(std::llround(tau / dt)));
    HistoryGrid grid;
    grid.values.resize(M + 1, n);
    grid.derivs.resize(M + 1, n);
    if (history.kind == HistorySpec::Kind::Constant) {
        if (history.value.size() != n)
            throw ConfigError("history dimension mismatch");
        grid.values = history.value.transpose().replicate(M + 1, 1);
        grid.derivs.setZero();
        return grid;
    }
    if (history.samples.cols() != n) throw ConfigError("history dimension mismatch");
    if (std::abs(history.span() - tau) > 1e-9 * std::max(1.0, tau))
        throw ConfigError("sampled history must cover exactly [-tau, 0]");
    if (std::abs(history.dt - dt) > 1e-9 * dt)
        throw ConfigError("sampled history grid step must match the solver step");
    if (history.samples.rows() != M + 1)
        throw ConfigError("sampled history row count mismatch");
    grid.values = history.samples;
    grid.derivs = (history.derivs.size() > 0) ? history.derivs
                                              : fd4_derivatives(history.samples, dt);
    return grid;
}

void check_finite(const Eigen::VectorXd& x, double t) {
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kBlowupThreshold)
        throw DivergedError("solution diverged at t = " + std::to_string(t), t);
}

}  // namespace

double snap_step(double dt_request, const std::vector<double>& constraints) {
    if (dt_request <= 0.0) throw ConfigError("dt must be positive");
    std::vector<double> cs;
    for (double c : constraints)
        if (c > 0.0) cs.push_back(c);
    if (cs.empty()) return dt_request;
    const double base = *std::min_element(cs.begin(), cs.end());
    long long k = static_cast<long long>(std::ceil(base / dt_request - 1e-9));
    k = std::max<long long>(k, 1);
    const long long k_cap = k + 100000;
    for (; k <= k_cap; ++k) {
        const double dt = base / static_cast<double>(k);
        bool ok = true;
        for (double c : cs) {
            const double m = std::llround(c / dt);
            if (std::abs(m * dt - c) > 1e-12 * std::max(1.0, c)) {
                ok = false;
                break;
            }
        }
        if (ok) return dt;
    }
    throw ConfigError("cannot adjust dt to divide all delays");
}

SimulationResult simulate(const DelaySystem& system, const HistorySpec& history,
                          double t_end, double dt_request) {
    if (t_end <= 0.0) throw ConfigError("t_end must be positive");
    if (system.periodic_delay)
        throw ConfigError("periodic-delay systems use simulate_digital");

    std::vector<double> constraints = system.discrete_delays;
    if (system.distributed) constraints.push_back(system.distributed->support);
    const double dt = snap_step(dt_request, constraints);

    const double tau = std::max(system.tau_max, dt);
    const int M = static_cast<int>(std::llround(tau / dt));
    const int n = system.n;

    DenseHistory dense(-tau, dt, n);
    {
        HistoryGrid grid = sample_history(history, tau, dt, n);
        for (int i = 0; i <= M; ++i)
            dense.push(grid.values.row(i).transpose(), grid.derivs.row(i).transpose(),
                       grid.derivs.row(i).transpose());
    }

    const int dist_M =
        system.distributed
            ? static_cast<int>(std::llround(system.distributed->support / dt))
            : 0;
    const bool const_kernel = system.distributed && system.distributed->constant_kernel;
    std::vector<double> kernel_w;
    if (system.distributed && !const_kernel) {
        kernel_w.resize(dist_M + 1);
        for (int m = 0; m <= dist_M; ++m) {
            double w = system.distributed->kernel(m * dt);
            if (m == 0 || m == dist_M) w *= 0.5;
            kernel_w[m] = w * dt;
        }
    }
    const double k0 = const_kernel ? system.distributed->kernel(0.0) : 0.0;

    std::vector<Eigen::VectorXd> delayed(system.discrete_delays.size(),
                                         Eigen::VectorXd(n));
    Eigen::VectorXd dist_value(n), cum_hi(n), cum_lo(n), x_lo(n), past(n);

    auto field = [&](double t, const Eigen::VectorXd& y) {
        for (size_t j = 0; j < system.discrete_delays.size(); ++j)
            dense.eval_into(t - system.discrete_delays[j], delayed[j]);
        if (system.distributed) {
            const double support = system.distributed->support;
            if (const_kernel) {
                // Sliding-window composite trapezoid via the cumulative sums.
                dense.cumulative_into(t, y, cum_hi);
                dense.eval_into(t - support, x_lo);
                dense.cumulative_into(t - support, x_lo, cum_lo);
                dist_value = k0 * (cum_hi - cum_lo);
            } else {
                dist_value = kernel_w[0] * y;
                for (int m = 1; m <= dist_M; ++m) {
                    dense.eval_into(t - m * dt, past);
                    dist_value += kernel_w[m] * past;
                }
            }
        }
        return system.eval_rhs(t, y, delayed, dist_value);
    };

    const int steps = static_cast<int>(std::ceil(t_end / dt - 1e-9));
    Trajectory traj;
    traj.t0 = 0.0;
    traj.dt = dt;
    traj.samples.resize(steps + 1, n);

    Eigen::VectorXd x = dense.node_value(M);
    traj.samples.row(0) = x.transpose();

    for (int i = 0; i < steps; ++i) {
        const double t = i * dt;
        const Eigen::VectorXd k1 = field(t, x);
        if (i == 0)
            dense.set_right_derivative(M, k1);  // right limit at the junction
        const Eigen::VectorXd k2 = field(t + 0.5 * dt, x + (0.5 * dt) * k1);
        const Eigen::VectorXd k3 = field(t + 0.5 * dt, x + (0.5 * dt) * k2);
        const Eigen::VectorXd k4 = field(t + dt, x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite(x, t + dt);
        const Eigen::VectorXd f_new = field(t + dt, x);
        dense.push(x, f_new, f_new);
        traj.samples.row(i + 1) = x.transpose();
    }

    SimulationResult result;
    result.dt = dt;
    result.trajectory = std::move(traj);
    {
        const int last = dense.nodes() - 1;
        Eigen::MatrixXd vals(M + 1, n), ders(M + 1, n);
        for (int i = 0; i <= M; ++i) {
            vals.row(i) = dense.node_value(last - M + i).transpose();
            ders.row(i) = dense.node_deriv_left(last - M + i).transpose();
        }
        result.final_history = HistorySpec::sampled(vals, dt, ders);
    }
    return result;
}

SimulationResult simulate_distributed(const DelaySystem& system,
                                      const HistorySpec& history, double t_end,
                                      double dt_request) {
    if (!system.distributed)
        throw ConfigError("system has no distributed kernel");
    return simulate(system, history, t_end, dt_request);
}

SimulationResult simulate_digital(const DelaySystem& system,
                                  double quantizer_resolution,
                                  const HistorySpec& history, double t_end,
                                  double dt_request) {
    if (!system.periodic_delay)
        throw ConfigError("system has no periodic delay specification");
    if (!system.drift || !system.control)
        throw ConfigError("digital system needs drift and control fields");
    const double Dt = system.periodic_delay->sample_dt;
    const int r = system.periodic_delay->hold_multiplier;
    if (Dt <= 0.0 || r < 0) throw ConfigError("invalid periodic delay spec");
    if (t_end <= 0.0) throw ConfigError("t_end must be positive");

    const double dt = snap_step(std::min(dt_request, Dt), {Dt});
    const int sub = static_cast<int>(std::llround(Dt / dt));
    const double tau = std::max(r, 1) * Dt;
    const int M = static_cast<int>(std::llround(tau / dt));
    const int n = system.n;

    DenseHistory dense(-tau, dt, n);
    {
        HistoryGrid grid = sample_history(history, tau, dt, n);
        for (int i = 0; i <= M; ++i)
            dense.push(grid.values.row(i).transpose(), grid.derivs.row(i).transpose(),
                       grid.derivs.row(i).transpose());
    }

    const int steps = static_cast<int>(std::ceil(t_end / dt - 1e-9));
    Trajectory traj;
    traj.t0 = 0.0;
    traj.dt = dt;
    traj.samples.resize(steps + 1, n);

    Eigen::VectorXd x = dense.node_value(M);
    traj.samples.row(0) = x.transpose();

    Eigen::VectorXd held_control(n), f_tmp(n), g_tmp(n);
    auto field = [&](const Eigen::VectorXd& y) {
        system.drift(y, f_tmp);
        return (f_tmp + held_control).eval();
    };

    for (int i = 0; i < steps; ++i) {
        const double t = i * dt;
        if (i % sub == 0) {  // sampling instant: measure, quantize, hold
            Eigen::VectorXd measured = dense.eval(t - r * Dt);
            for (int c = 0; c < n; ++c)
                measured(c) = quantize(measured(c), quantizer_resolution);
            system.control(measured, g_tmp);
            held_control = g_tmp;
        }
        const Eigen::VectorXd k1 = field(x);
        if (i == 0) dense.set_right_derivative(M, k1);
        const Eigen::VectorXd k2 = field(x + (0.5 * dt) * k1);
        const Eigen::VectorXd k3 = field(x + (0.5 * dt) * k2);
        const Eigen::VectorXd k4 = field(x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite(x, t + dt);
        const Eigen::VectorXd f_new = field(x);
        dense.push(x, f_new, f_new);
        traj.samples.row(i + 1) = x.transpose();
    }

    SimulationResult result;
    result.dt = dt;
    result.trajectory = std::move(traj);
    {
        const int last = dense.nodes() - 1;
        Eigen::MatrixXd vals(M + 1, n), ders(M + 1, n);
        for (int i = 0; i <= M; ++i) {
            vals.row(i) = dense.node_value(last - M + i).transpose();
            ders.row(i) = dense.node_deriv_left(last - M + i).transpose();
        }
        result.final_history = HistorySpec::sampled(vals, dt, ders);
    }
    return result;
}

Trajectory stroboscopic_sample(const Trajectory& traj, double period, double phase) {
    if (traj.dt <= 0.0) throw ConfigError("trajectory has no step");
    const long long stride = std::llround(period / traj.dt);
    if (stride < 1 || std::abs(stride * traj.dt - period) > 1e-9 * period)
        throw ConfigError("stroboscopic period must be a multiple of dt");
    long long i0 = std::llround((phase - traj.t0) / traj.dt);
    if (i0 < 0 || std::abs(traj.t0 + i0 * traj.dt - phase) > 1e-9 * std::max(1.0, period))
        throw ConfigError("stroboscopic phase must lie on the sample grid");

    const long long count = (traj.size() - 1 - i0) / stride + 1;
    if (count < 1) throw ConfigError("stroboscopic sampling yields no samples");
    Trajectory out;
    out.t0 = phase;
    out.dt = period;
    out.samples.resize(count, traj.dim());
    for (long long j = 0; j < count; ++j)
        out.samples.row(j) = traj.samples.row(i0 + j * stride);
    return out;
}

}  // namespace ssmdelay
