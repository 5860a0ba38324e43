#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssmdelay/pipeline.hpp"

namespace ssmdelay::pipeline {

/// A ready-to-run reduction experiment: data generation for training/tests,
/// fit settings, and the trimming applied before scoring predictions. For
/// parameter studies, `nodes` carries one DataSpec per parameter value.
struct ExperimentDef {
    std::string name;
    DataSpec training;
    DataSpec tests;
    double test_trim = 0.0;      // head dropped from tests before predicting
    double observable_scale = 1.0;
    FitSpec fit;

    // Parametric studies only.
    std::vector<double> node_values;
    std::vector<DataSpec> node_training;
    ParametricSSM::Scheme scheme = ParametricSSM::Scheme::Linear;
    std::vector<double> scan_grid;

    // Digital-control (stroboscopic) studies only.
    bool digital = false;
    double quantizer_resolution = 0.0;
};

/// The named experiments shipped with the project; parameters are frozen so
/// seeded reruns are bit-identical.
ExperimentDef hutchinson_experiment();
ExperimentDef two_neuron_experiment();
ExperimentDef mackey_glass_experiment();
ExperimentDef rossler_experiment();
ExperimentDef traffic_parametric_experiment();
ExperimentDef cushing_bifurcation_experiment();
ExperimentDef microchaos_experiment();

ExperimentDef experiment_by_name(const std::string& name);
std::vector<std::string> experiment_names();

/// Drops the first `head` seconds of a trajectory.
Trajectory trim_head(const Trajectory& traj, double head);

/// Runs an experiment's data generation (training or tests), applying the
/// digital/stroboscopic path and observable scaling when configured.
std::vector<Trajectory> make_dataset(const ExperimentDef& def, const DataSpec& spec);

/// Fits the experiment's single model (non-parametric experiments).
SSMModel run_fit(const ExperimentDef& def, FitDiagnostics* diag = nullptr);

/// Fits all node models and assembles the parametric family.
ParametricSSM run_parametric_fit(const ExperimentDef& def);

}  // namespace ssmdelay::pipeline
