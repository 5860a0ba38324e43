#include "ssmdelay/pipeline.hpp"

#include <cmath>

#include "ssmdelay/errors.hpp"

namespace ssmdelay::pipeline {

uint64_t Rng::next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
    const double u = (next() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

Eigen::VectorXd Rng::in_ball(const Eigen::VectorXd& center, double radius) {
    const int n = static_cast<int>(center.size());
    // Rejection sampling from the cube; dimension stays small here.
    for (;;) {
        Eigen::VectorXd offset(n);
        for (int i = 0; i < n; ++i) offset(i) = uniform(-1.0, 1.0);
        if (offset.norm() <= 1.0) return center + radius * offset;
    }
}

std::vector<Trajectory> generate_trajectories(const DataSpec& spec) {
    auto system = build_system(spec.system, spec.overrides);
    std::vector<Trajectory> out;
    for (const auto& ic : spec.initial_histories) {
        auto res = simulate(system, HistorySpec::constant(ic), spec.t_end, spec.dt);
        out.push_back(std::move(res.trajectory));
    }
    return out;
}

namespace {

/// Strided copy of the embedded rows (derivatives included), segment-aware.
EmbeddedData stride_rows(const EmbeddedData& data, int stride) {
    if (stride <= 1) return data;
    EmbeddedData out;
    out.dt = data.dt;
    out.config = data.config;
    out.skipped_trajectories = data.skipped_trajectories;
    std::vector<int> keep;
    for (auto [begin, end] : data.segments) {
        const int first = static_cast<int>(keep.size());
        for (int i = begin; i < end; i += stride) keep.push_back(i);
        out.segments.emplace_back(first, static_cast<int>(keep.size()));
    }
    out.Y.resize(keep.size(), data.Y.cols());
    if (data.has_derivatives()) out.dY.resize(keep.size(), data.Y.cols());
    out.traj_id.resize(keep.size());
    out.row_time.resize(keep.size());
    for (size_t i = 0; i < keep.size(); ++i) {
        out.Y.row(i) = data.Y.row(keep[i]);
        if (data.has_derivatives()) out.dY.row(i) = data.dY.row(keep[i]);
        out.traj_id[i] = data.traj_id[keep[i]];
        out.row_time[i] = data.row_time[keep[i]];
    }
    return out;
}

}  // namespace

SSMModel fit_model(const std::vector<Trajectory>& training, const FitSpec& spec,
                   const Eigen::VectorXd& anchor, FitDiagnostics* diag) {
    auto data = embed(training, spec.embedding);
    if (spec.kind == DynamicsKind::Poly) estimate_derivatives(data);
    EmbeddedData fit_data = stride_rows(data, spec.fit_row_stride);
    SSMModel model = fit_manifold(fit_data, spec.d, spec.man_order, anchor, diag);
    if (spec.kind == DynamicsKind::Poly) {
        fit_polyfield(model, fit_data, spec.dyn_order, spec.ridge, diag);
    } else {
        fit_rbf(model, data, spec.rbf_stride, spec.rbf_max_centers);
    }
    return model;
}

OrderSweepResult sweep_orders(const std::vector<Trajectory>& training,
                              const std::vector<Trajectory>& tests,
                              const FitSpec& base, const Eigen::VectorXd& anchor,
                              const std::vector<int>& man_orders,
                              const std::vector<int>& dyn_orders) {
    OrderSweepResult best;
    best.nmte = std::numeric_limits<double>::infinity();
    for (int mo : man_orders) {
        for (int dyno : dyn_orders) {
            FitSpec spec = base;
            spec.man_order = mo;
            spec.dyn_order = dyno;
            try {
                SSMModel model = fit_model(training, spec, anchor);
                const double nmte = mean_nmte(predict_tests(model, tests));
                if (nmte < best.nmte) best = {mo, dyno, nmte};
            } catch (const std::exception&) {
                // Skip configurations that fail to fit.
            }
        }
    }
    if (!std::isfinite(best.nmte))
        throw NumericError("sweep_orders: no configuration produced a model");
    return best;
}

std::vector<PredictionReport> predict_tests(const SSMModel& model,
                                            const std::vector<Trajectory>& tests) {
    std::vector<PredictionReport> reports;
    for (const auto& test : tests) reports.push_back(predict(model, test));
    return reports;
}

double mean_nmte(const std::vector<PredictionReport>& reports) {
    if (reports.empty()) throw ConfigError("mean_nmte: no reports");
    double acc = 0.0;
    for (const auto& r : reports) acc += r.nmte;
    return acc / reports.size();
}

Eigen::MatrixXd reduced_traces(const SSMModel& model,
                               const std::vector<Trajectory>& trajectories) {
    EmbeddingConfig cfg = model.embedding;
    auto data = embed(trajectories, cfg);
    Eigen::MatrixXd eta(data.rows(), model.d);
    for (int i = 0; i < data.rows(); ++i)
        eta.row(i) = model.reduce(data.Y.row(i).transpose()).transpose();
    return eta;
}

Eigen::MatrixXd reduced_orbit(const SSMModel& model, const Eigen::VectorXd& eta0,
                              int steps, double dt) {
    Eigen::MatrixXd orbit(steps + 1, model.d);
    Eigen::VectorXd eta = eta0;
    const double scale = 1.0 + eta0.norm();
    for (int i = 0; i <= steps; ++i) {
        orbit.row(i) = eta.transpose();
        if (i == steps) break;
        eta = model.advance(eta, dt);
        if (!eta.allFinite() || eta.norm() > 1e6 * scale)
            throw DivergedError("reduced orbit diverged", i * dt);
    }
    return orbit;
}

LyapunovFit lyapunov_full_dde(const DelaySystem& system,
                              const Eigen::VectorXd& burnin_history,
                              double burn_in, int count, double eps,
                              double horizon, double dt,
                              const EmbeddingConfig& embedding, uint64_t seed) {
    auto burn = simulate(system, HistorySpec::constant(burnin_history), burn_in, dt);
    const Eigen::VectorXd anchor_state =
        burn.trajectory.samples.row(burn.trajectory.size() - 1).transpose();

    Rng rng(seed);
    std::vector<Eigen::MatrixXd> members;
    EmbeddingConfig cfg = embedding;
    cfg.skip_time = 0.0;
    int rows = -1;
    for (int i = 0; i < count; ++i) {
        const Eigen::VectorXd ic = rng.in_ball(anchor_state, eps);
        auto run = simulate(system, HistorySpec::constant(ic), horizon, dt);
        auto data = embed({run.trajectory}, cfg);
        if (rows < 0) rows = data.rows();
        members.push_back(data.Y.topRows(rows));
    }

    // Attractor scale from the burn-in tail in embedding space.
    auto tail = embed({burn.trajectory}, cfg);
    const int keep = std::min(tail.rows(), 4000);
    const double diameter = cloud_diameter(tail.Y.bottomRows(keep));
    return lyapunov_from_ensemble(members, dt, diameter);
}

LyapunovFit lyapunov_reduced_model(const SSMModel& model,
                                   const Eigen::VectorXd& eta_anchor, int count,
                                   double eps, double horizon, uint64_t seed) {
    Rng rng(seed);
    const double dt = model.dt_model;
    const int steps = static_cast<int>(std::ceil(horizon / dt - 1e-9));
    std::vector<Eigen::MatrixXd> members;
    double diameter_scale = 0.0;
    for (int i = 0; i < count; ++i) {
        Eigen::VectorXd eta = rng.in_ball(eta_anchor, eps);
        Eigen::MatrixXd rows(steps + 1, model.k);
        for (int t = 0; t <= steps; ++t) {
            rows.row(t) = model.lift(eta).transpose();
            diameter_scale = std::max(diameter_scale, eta.norm());
            if (t < steps) eta = model.advance(eta, dt);
            if (!eta.allFinite())
                throw NumericError("lyapunov_reduced_model: orbit diverged");
        }
        members.push_back(std::move(rows));
    }
    // Diameter from the union of the generated orbits.
    Eigen::MatrixXd all(members.size() * (steps + 1), model.k);
    for (size_t i = 0; i < members.size(); ++i)
        all.middleRows(static_cast<int>(i) * (steps + 1), steps + 1) = members[i];
    const double diameter = cloud_diameter(all);
    return lyapunov_from_ensemble(members, dt, diameter);
}

double cloud_diameter(const Eigen::MatrixXd& rows, int cap) {
    Eigen::MatrixXd P = rows;
    if (P.rows() > cap) {
        Eigen::MatrixXd sub(cap, P.cols());
        const double step = static_cast<double>(P.rows()) / cap;
        for (int i = 0; i < cap; ++i) sub.row(i) = P.row(static_cast<int>(i * step));
        P = sub;
    }
    double best = 0.0;
    for (int i = 0; i < P.rows(); ++i)
        for (int j = i + 1; j < P.rows(); ++j)
            best = std::max(best, (P.row(i) - P.row(j)).norm());
    return best;
}

}  // namespace ssmdelay::pipeline
