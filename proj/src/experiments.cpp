#include "ssmdelay/experiments.hpp"

#include <cmath>

#include "ssmdelay/errors.hpp"

namespace ssmdelay::pipeline {

namespace {

Eigen::VectorXd vec1(double v) {
    return Eigen::VectorXd::Constant(1, v);
}

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

Eigen::VectorXd vec3(double a, double b, double c) {
    Eigen::VectorXd v(3);
    v << a, b, c;
    return v;
}

std::vector<Eigen::VectorXd> cushing_ladder(double tau) {
    std::vector<Eigen::VectorXd> ics;
    for (int i = 0; i < 13; ++i) {
        const double x0 = 1.25 + 14.75 * i / 12.0;
        ics.push_back(vec2(x0, x0 * tau));
        ics.push_back(vec2(-x0, -x0 * tau));
    }
    return ics;
}

std::vector<Eigen::VectorXd> traffic_ics(int count, uint64_t seed, double rmax) {
    Rng rng(seed);
    std::vector<Eigen::VectorXd> ics;
    for (int i = 0; i < count; ++i) {
        const double a = rmax * (i + 1.0) / count;
        ics.push_back(vec3(a * rng.uniform(0.5, 1.0) * (rng.uniform(-1, 1) > 0 ? 1 : -1),
                           0.3 * a * rng.uniform(-1, 1), 0.3 * a * rng.uniform(-1, 1)));
    }
    return ics;
}

}  // namespace

ExperimentDef hutchinson_experiment() {
    ExperimentDef def;
    def.name = "hutchinson";
    def.training.system = "hutchinson";
    def.training.dt = 0.01;
    def.training.t_end = 48.0;
    for (double a : {0.1, -0.1, 0.25, -0.25, 0.45, -0.45})
        def.training.initial_histories.push_back(vec1(a));
    def.tests = def.training;
    def.tests.initial_histories = {vec1(0.18), vec1(-0.3)};
    def.fit.embedding.observable = {0};
    def.fit.embedding.k = 9;
    def.fit.embedding.lag_steps = 15;
    def.fit.d = 2;
    def.fit.man_order = 3;
    def.fit.dyn_order = 5;
    return def;
}

ExperimentDef two_neuron_experiment() {
    ExperimentDef def;
    def.name = "two-neuron";
    def.training.system = "two-neuron";
    def.training.dt = 0.01;
    def.training.t_end = 60.0;
    Rng rng(5);
    for (int i = 0; i < 6; ++i) {
        const double amp = 1e-3 * (1.0 + i);
        const double phi = rng.uniform(0, 2 * M_PI);
        def.training.initial_histories.push_back(
            vec2(amp * std::cos(phi), amp * std::sin(phi)));
    }
    def.tests = def.training;
    def.tests.initial_histories.clear();
    Rng rng2(17);
    for (int i = 0; i < 4; ++i) {
        const double amp = 1.5e-3 * (1.0 + i);
        const double phi = rng2.uniform(0, 2 * M_PI);
        def.tests.initial_histories.push_back(
            vec2(amp * std::cos(phi), amp * std::sin(phi)));
    }
    def.test_trim = 16.0;
    def.fit.embedding.observable = {0};
    def.fit.embedding.k = 5;
    def.fit.embedding.lag_steps = 25;
    def.fit.embedding.skip_time = 8.0;
    def.fit.d = 2;
    def.fit.man_order = 3;
    def.fit.dyn_order = 5;
    def.fit.fit_row_stride = 2;
    return def;
}

ExperimentDef mackey_glass_experiment() {
    ExperimentDef def;
    def.name = "mackey-glass";
    def.training.system = "mackey-glass";
    def.training.dt = 0.005;
    def.training.t_end = 800.0;
    def.training.initial_histories = {vec1(0.2), vec1(1.3)};
    def.tests = def.training;
    def.tests.t_end = 100.0;
    def.tests.initial_histories = {vec1(0.7)};
    def.test_trim = 50.0;
    def.fit.embedding.observable = {0};
    def.fit.embedding.k = 19;
    def.fit.embedding.lag_steps = 10;
    def.fit.embedding.skip_time = 50.0;
    def.fit.d = 6;
    def.fit.man_order = 1;
    def.fit.dyn_order = 3;
    def.fit.fit_row_stride = 4;
    return def;
}

ExperimentDef rossler_experiment() {
    ExperimentDef def;
    def.name = "rossler-delay";
    def.training.system = "rossler-delay";
    def.training.dt = 0.01;
    def.training.t_end = 500.0;
    for (double a : {0.05, -0.08, 0.12, 0.02})
        def.training.initial_histories.push_back(vec3(a, a * 0.5, -a));
    def.tests = def.training;
    def.tests.t_end = 120.0;
    def.tests.initial_histories = {vec3(0.06, 0.01, -0.04), vec3(-0.05, 0.03, 0.02),
                                   vec3(0.09, -0.02, 0.01), vec3(0.03, 0.04, -0.06)};
    def.test_trim = 60.0;
    def.fit.embedding.observable = {1};
    def.fit.embedding.k = 23;
    def.fit.embedding.lag_steps = 30;
    def.fit.embedding.skip_time = 60.0;
    def.fit.d = 6;
    def.fit.man_order = 1;
    def.fit.kind = DynamicsKind::Rbf;
    def.fit.rbf_stride = 10;
    def.fit.rbf_max_centers = 2000;
    return def;
}

ExperimentDef traffic_parametric_experiment() {
    ExperimentDef def;
    def.name = "traffic-parametric";
    def.node_values = {1.03, 1.05, 1.07, 1.09};
    for (double tau : def.node_values) {
        DataSpec ds;
        ds.system = "traffic";
        ds.overrides = {{"tau", tau}};
        ds.dt = 0.01;
        ds.t_end = 400.0;
        ds.initial_histories = traffic_ics(8, 11, 5.0);
        def.node_training.push_back(ds);
    }
    def.training = def.node_training.front();
    def.tests.system = "traffic";
    def.tests.dt = 0.01;
    def.tests.t_end = 170.0;
    def.tests.initial_histories = traffic_ics(2, 99, 4.0);
    def.test_trim = 20.0;
    def.scheme = ParametricSSM::Scheme::CubicSpline;
    def.fit.embedding.observable = {0, 1, 2};
    def.fit.embedding.k = 9;
    def.fit.embedding.lag_steps = 125;
    def.fit.embedding.skip_time = 20.0;
    def.fit.d = 2;
    def.fit.man_order = 3;
    def.fit.dyn_order = 5;
    def.fit.fit_row_stride = 5;
    return def;
}

ExperimentDef cushing_bifurcation_experiment() {
    ExperimentDef def;
    def.name = "cushing-bifurcation";
    def.node_values = {0.95, 0.97, 0.99, 1.00, 1.01, 1.02, 1.03, 1.035};
    def.observable_scale = 0.125;  // keeps degree-13 monomials conditioned
    for (double tau : def.node_values) {
        DataSpec ds;
        ds.system = "cushing-lifted";
        ds.overrides = {{"tau", tau}};
        ds.dt = 0.01;
        // Short windows above the second fold keep radial coverage between
        // the attracting rings; long windows resolve the slow inner drift.
        ds.t_end = tau >= 1.0225 ? 30.0 : 120.0;
        ds.initial_histories = cushing_ladder(tau);
        def.node_training.push_back(ds);
    }
    def.training = def.node_training.front();
    def.tests.system = "cushing-lifted";
    def.tests.dt = 0.01;
    def.tests.t_end = 40.0;
    for (double x0 : {3.3, -7.7, 11.3, -14.1})
        def.tests.initial_histories.push_back(vec2(x0, x0));
    def.test_trim = 5.0;
    def.scheme = ParametricSSM::Scheme::Linear;
    for (double t = 0.95; t <= 1.0351; t += 0.005) def.scan_grid.push_back(t);
    def.fit.embedding.observable = {0};
    def.fit.embedding.k = 5;
    def.fit.embedding.lag_steps = 12;
    def.fit.embedding.skip_time = 4.0;
    def.fit.d = 2;
    def.fit.man_order = 3;
    def.fit.dyn_order = 13;
    def.fit.fit_row_stride = 2;
    return def;
}

ExperimentDef microchaos_experiment() {
    ExperimentDef def;
    def.name = "microchaos-zoh";
    def.digital = true;
    def.quantizer_resolution = 0.01;
    def.training.system = "microchaos";
    def.training.overrides = {{"a", 1.0}, {"p_gain", 1.2}, {"resolution", 0.01},
                              {"sample_dt", 0.02}, {"r", 1.0}};
    def.training.dt = 0.002;
    def.training.t_end = 400.0;
    for (double x0 : {0.3, -0.25, 0.18, -0.12})
        def.training.initial_histories.push_back(vec1(x0));
    def.tests = def.training;
    def.tests.t_end = 100.0;
    def.tests.initial_histories = {vec1(0.22)};
    def.fit.embedding.observable = {0};
    def.fit.embedding.k = 5;
    def.fit.embedding.lag_steps = 1;
    def.fit.embedding.skip_time = 2.0;
    def.fit.d = 2;
    def.fit.man_order = 1;
    def.fit.kind = DynamicsKind::Rbf;
    def.fit.rbf_stride = 1;
    def.fit.rbf_max_centers = 1200;
    return def;
}

ExperimentDef experiment_by_name(const std::string& name) {
    for (const auto& builder :
         {hutchinson_experiment, two_neuron_experiment, mackey_glass_experiment,
          rossler_experiment, traffic_parametric_experiment,
          cushing_bifurcation_experiment, microchaos_experiment}) {
        ExperimentDef def = builder();
        if (def.name == name) return def;
    }
    throw CatalogError("unknown experiment '" + name + "'");
}

std::vector<std::string> experiment_names() {
    return {"hutchinson",          "two-neuron",        "mackey-glass",
            "rossler-delay",       "traffic-parametric", "cushing-bifurcation",
            "microchaos-zoh"};
}

Trajectory trim_head(const Trajectory& traj, double head) {
    if (head <= 0) return traj;
    const int skip = static_cast<int>(std::ceil(head / traj.dt - 1e-9));
    if (skip >= traj.size() - 1) throw ConfigError("trim_head: nothing left");
    Trajectory out;
    out.t0 = traj.time(skip);
    out.dt = traj.dt;
    out.samples = traj.samples.bottomRows(traj.size() - skip);
    return out;
}

std::vector<Trajectory> make_dataset(const ExperimentDef& def, const DataSpec& spec) {
    std::vector<Trajectory> out;
    if (def.digital) {
        const auto& p = spec.overrides;
        auto system = micro_chaos_toy(p.at("a"), p.at("p_gain"), p.at("resolution"),
                                      p.at("sample_dt"), static_cast<int>(p.at("r")));
        for (const auto& ic : spec.initial_histories) {
            auto res = simulate_digital(system, def.quantizer_resolution,
                                        HistorySpec::constant(ic), spec.t_end, spec.dt);
            out.push_back(stroboscopic_sample(res.trajectory, p.at("sample_dt"), 0.0));
        }
    } else {
        out = generate_trajectories(spec);
    }
    if (def.observable_scale != 1.0)
        for (auto& traj : out) traj.samples *= def.observable_scale;
    return out;
}

SSMModel run_fit(const ExperimentDef& def, FitDiagnostics* diag) {
    auto training = make_dataset(def, def.training);
    return fit_model(training, def.fit, Eigen::VectorXd::Zero(def.fit.embedding.k), diag);
}

ParametricSSM run_parametric_fit(const ExperimentDef& def) {
    if (def.node_training.empty())
        throw ConfigError("experiment '" + def.name + "' has no parameter nodes");
    std::vector<SSMModel> models;
    for (const auto& node : def.node_training) {
        auto training = make_dataset(def, node);
        models.push_back(
            fit_model(training, def.fit, Eigen::VectorXd::Zero(def.fit.embedding.k)));
    }
    return ParametricSSM::create(def.node_values, models, def.scheme);
}

}  // namespace ssmdelay::pipeline
