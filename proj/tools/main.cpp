// Batch front-end: wires experiment configs to the library pipelines and
// writes plot-ready CSV/JSON artifacts plus a manifest per run.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ssmdelay/chaos.hpp"
#include "ssmdelay/embedding.hpp"
#include "ssmdelay/errors.hpp"
#include "ssmdelay/experiments.hpp"
#include "ssmdelay/oracle.hpp"
#include "ssmdelay/parametric.hpp"
#include "ssmdelay/pipeline.hpp"
#include "ssmdelay/spectrum.hpp"
#include "ssmdelay/ssm.hpp"
#include "ssmdelay/systems.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ssmdelay;
using namespace ssmdelay::pipeline;

namespace {

constexpr const char* kVersion = "ssmdelay 1.0.0";

uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

struct Run {
    fs::path out_dir;
    json manifest;

    Run(const std::string& out, const std::string& config_bytes, uint64_t seed) {
        out_dir = out;
        fs::create_directories(out_dir);
        manifest["version"] = kVersion;
        manifest["seed"] = seed;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a(config_bytes)));
        manifest["config_hash"] = buf;
        manifest["outputs"] = json::array();
    }

    std::string path(const std::string& name) const { return (out_dir / name).string(); }

    void record(const std::string& name) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a(read_file(path(name)))));
        manifest["outputs"].push_back({{"file", name}, {"fnv1a", buf}});
    }

    void finish() {
        std::ofstream out(path("manifest.json"));
        out << manifest.dump(2) << "\n";
    }
};

json load_config(const std::string& path) {
    json cfg;
    try {
        cfg = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return cfg;
}

ParamMap param_map(const json& j) {
    ParamMap p;
    for (auto it = j.begin(); it != j.end(); ++it) p[it.key()] = it.value().get<double>();
    return p;
}

/// Experiment definition from a config: frozen named experiment plus
/// field-level overrides.
ExperimentDef experiment_from_config(const json& cfg) {
    ExperimentDef def = experiment_by_name(cfg.at("experiment").get<std::string>());
    if (cfg.contains("simulation")) {
        const auto& sim = cfg["simulation"];
        if (sim.contains("dt")) def.training.dt = def.tests.dt = sim["dt"].get<double>();
        if (sim.contains("t_end")) def.training.t_end = sim["t_end"].get<double>();
        if (sim.contains("test_t_end")) def.tests.t_end = sim["test_t_end"].get<double>();
    }
    if (cfg.contains("embedding")) {
        const auto& emb = cfg["embedding"];
        if (emb.contains("k")) def.fit.embedding.k = emb["k"].get<int>();
        if (emb.contains("lag_steps")) def.fit.embedding.lag_steps = emb["lag_steps"].get<int>();
        if (emb.contains("skip_time")) def.fit.embedding.skip_time = emb["skip_time"].get<double>();
        if (emb.contains("observable"))
            def.fit.embedding.observable = emb["observable"].get<std::vector<int>>();
    }
    if (cfg.contains("model")) {
        const auto& m = cfg["model"];
        if (m.contains("d")) def.fit.d = m["d"].get<int>();
        if (m.contains("man_order")) def.fit.man_order = m["man_order"].get<int>();
        if (m.contains("dyn_order")) def.fit.dyn_order = m["dyn_order"].get<int>();
        if (m.contains("ridge")) def.fit.ridge = m["ridge"].get<double>();
        if (m.contains("rbf_stride")) def.fit.rbf_stride = m["rbf_stride"].get<int>();
        if (m.contains("rbf_max_centers"))
            def.fit.rbf_max_centers = m["rbf_max_centers"].get<int>();
        if (m.contains("kind"))
            def.fit.kind = m["kind"].get<std::string>() == "rbf" ? DynamicsKind::Rbf
                                                                 : DynamicsKind::Poly;
    }
    return def;
}

std::vector<Trajectory> trajectories_from_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".csv") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("no trajectory CSV files in " + dir);
    std::vector<Trajectory> out;
    for (const auto& f : files) out.push_back(read_trajectory_csv(f));
    return out;
}

void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& header,
                      const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ConfigError("cannot open for writing: " + path);
    std::fprintf(f, "%s\n", header.c_str());
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j)
            std::fprintf(f, j ? ",%.12e" : "%.12e", m(i, j));
        std::fputc('\n', f);
    }
    std::fclose(f);
}

int cmd_systems_list() {
    json out = json::array();
    for (const auto& entry : system_catalog()) {
        json params;
        for (const auto& [k, v] : entry.default_params) params[k] = v;
        const Eigen::VectorXd eq = entry.equilibrium(entry.default_params);
        out.push_back({{"name", entry.name},
                       {"default_params", params},
                       {"equilibrium", std::vector<double>(eq.data(), eq.data() + eq.size())}});
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    const std::string bytes = read_file(config_path);
    const json cfg = load_config(config_path);
    Run run(out_dir, bytes, cfg.value("seed", 1));
    ExperimentDef def = experiment_from_config(cfg);

    auto training = make_dataset(def, def.training);
    for (size_t i = 0; i < training.size(); ++i) {
        const std::string name = "train_" + std::to_string(i) + ".csv";
        write_trajectory_csv(training[i], run.path(name));
        run.record(name);
    }
    auto tests = make_dataset(def, def.tests);
    for (size_t i = 0; i < tests.size(); ++i) {
        const std::string name = "test_" + std::to_string(i) + ".csv";
        write_trajectory_csv(tests[i], run.path(name));
        run.record(name);
    }
    run.finish();
    return 0;
}

int cmd_spectrum(const std::string& config_path, const std::string& out_dir) {
    const std::string bytes = read_file(config_path);
    const json cfg = load_config(config_path);
    Run run(out_dir, bytes, cfg.value("seed", 1));

    const auto& sys_cfg = cfg.at("system");
    const std::string name = sys_cfg.at("name").get<std::string>();
    ParamMap overrides;
    if (sys_cfg.contains("overrides")) overrides = param_map(sys_cfg["overrides"]);
    auto system = build_system(name, overrides);
    auto eq = system_equilibrium(name, overrides);
    auto cm = linearize(system, eq);

    const auto& w = cfg.at("spectrum");
    auto spec = roots_in_window(cm, w.at("re_min").get<double>(),
                                w.at("re_max").get<double>(),
                                w.at("im_max").get<double>(),
                                w.value("seeds_per_axis", 24));
    Eigen::MatrixXd rows(spec.roots.size(), 3);
    for (size_t i = 0; i < spec.roots.size(); ++i)
        rows.row(i) << spec.roots[i].value.real(), spec.roots[i].value.imag(),
            spec.roots[i].residual;
    write_matrix_csv(rows, "re,im,residual", run.path("spectrum.csv"));
    run.record("spectrum.csv");
    run.finish();
    return 0;
}

int cmd_fit(const std::string& config_path, const std::string& out_dir,
            const std::string& data_dir, bool sweep) {
    const std::string bytes = read_file(config_path);
    const json cfg = load_config(config_path);
    Run run(out_dir, bytes, cfg.value("seed", 1));
    ExperimentDef def = experiment_from_config(cfg);

    std::vector<Trajectory> training = data_dir.empty()
                                           ? make_dataset(def, def.training)
                                           : trajectories_from_dir(data_dir);
    FitDiagnostics diag;
    if (sweep) {
        std::vector<Trajectory> tests;
        for (const auto& t : make_dataset(def, def.tests))
            tests.push_back(trim_head(t, def.test_trim));
        auto best = sweep_orders(training, tests, def.fit,
                                 Eigen::VectorXd::Zero(def.fit.embedding.k),
                                 {1, 2, 3}, {3, 5, 7});
        def.fit.man_order = best.man_order;
        def.fit.dyn_order = best.dyn_order;
    }
    auto model = fit_model(training, def.fit,
                           Eigen::VectorXd::Zero(def.fit.embedding.k), &diag);
    save_model_json(model, run.path("model.json"));
    run.record("model.json");

    json fit_info;
    fit_info["objective"] = diag.objective;
    fit_info["iterations"] = diag.iterations;
    fit_info["condition"] = diag.condition;
    fit_info["ridge_fallback"] = diag.ridge_fallback;
    fit_info["man_order"] = def.fit.man_order;
    fit_info["dyn_order"] = def.fit.dyn_order;
    json eigs = json::array();
    for (const auto& ev : model_eigenvalues(model))
        eigs.push_back({{"re", ev.real()}, {"im", ev.imag()}});
    fit_info["eigenvalues"] = eigs;
    std::ofstream(run.path("fit.json")) << fit_info.dump(2) << "\n";
    run.record("fit.json");
    run.finish();
    return 0;
}

int cmd_predict(const std::string& config_path, const std::string& model_path,
                const std::string& out_dir, const std::string& data_dir) {
    const std::string bytes = read_file(config_path);
    const json cfg = load_config(config_path);
    Run run(out_dir, bytes, cfg.value("seed", 1));
    ExperimentDef def = experiment_from_config(cfg);
    auto model = load_model_json(model_path);

    std::vector<Trajectory> tests;
    if (data_dir.empty()) {
        for (const auto& t : make_dataset(def, def.tests))
            tests.push_back(trim_head(t, def.test_trim));
    } else {
        tests = trajectories_from_dir(data_dir);
    }

    json report = json::array();
    for (size_t i = 0; i < tests.size(); ++i) {
        auto pred = predict(model, tests[i]);
        Eigen::MatrixXd rows(pred.times.size(), 3);
        for (size_t t = 0; t < pred.times.size(); ++t)
            rows.row(t) << pred.times[t], pred.test_rows(t, 0), pred.model_rows(t, 0);
        const std::string name = "prediction_" + std::to_string(i) + ".csv";
        write_matrix_csv(rows, "t,observed,predicted", run.path(name));
        run.record(name);
        report.push_back({{"test", i}, {"nmte", pred.nmte}, {"diverged", pred.diverged}});
    }
    std::ofstream(run.path("nmte.json")) << report.dump(2) << "\n";
    run.record("nmte.json");
    run.finish();
    return 0;
}

int cmd_diagnose(const std::string& config_path, const std::string& model_path,
                 const std::string& out_dir) {
    const std::string bytes = read_file(config_path);
    const json cfg = load_config(config_path);
    Run run(out_dir, bytes, cfg.value("seed", 1));
    ExperimentDef def = experiment_from_config(cfg);
    auto model = load_model_json(model_path);
    const json diag_cfg = cfg.value("diagnostics", json::object());
    const uint64_t seed = cfg.value("seed", 1);

    auto training = make_dataset(def, def.training);
    auto data = embed(training, def.fit.embedding);
    auto eta = reduced_traces(model, training);

    // Correlation dimension in embedding space and after projection.
    auto cd_emb = correlation_dimension(data.Y, 40, -1, -1, 4000);
    auto cd_red = correlation_dimension(eta, 40, -1, -1, 4000);
    Eigen::MatrixXd cd_rows(cd_emb.radii.size(), 4);
    for (size_t i = 0; i < cd_emb.radii.size(); ++i)
        cd_rows.row(i) << cd_emb.radii[i], cd_emb.corr[i], cd_red.radii[i], cd_red.corr[i];
    write_matrix_csv(cd_rows, "l_embedded,C_embedded,l_reduced,C_reduced",
                     run.path("corrdim.csv"));
    run.record("corrdim.csv");

    json summary;
    summary["corr_dim_embedded"] = cd_emb.slope;
    summary["corr_dim_reduced"] = cd_red.slope;
    summary["suggested_d"] = embedding_dimension_rule(cd_emb.slope);

    // Model-orbit PDF against the training measure.
    const int orbit_steps = diag_cfg.value("pdf_orbit_steps", 30000);
    Eigen::VectorXd eta0 = eta.row(eta.rows() / 2).transpose();
    auto orbit = reduced_orbit(model, eta0, orbit_steps, model.dt_model);
    auto pdf = pdf_compare(eta, orbit);
    json l1 = json::array();
    Eigen::MatrixXd pdf_rows(pdf.bins, 2 * model.d);
    for (int c = 0; c < model.d; ++c) {
        l1.push_back(pdf.l1[c]);
        for (int b = 0; b < pdf.bins; ++b) {
            pdf_rows(b, 2 * c) = pdf.hist_a[c](b);
            pdf_rows(b, 2 * c + 1) = pdf.hist_b[c](b);
        }
    }
    std::string pdf_header;
    for (int c = 0; c < model.d; ++c) {
        if (c) pdf_header += ",";
        pdf_header += "train_" + std::to_string(c + 1) + ",model_" + std::to_string(c + 1);
    }
    write_matrix_csv(pdf_rows, pdf_header, run.path("pdf.csv"));
    run.record("pdf.csv");
    summary["pdf_l1"] = l1;

    // Lyapunov estimates, full system vs reduced model.
    if (diag_cfg.value("lyapunov", true) && !def.digital) {
        auto system = build_system(def.training.system, def.training.overrides);
        const double burn_in = diag_cfg.value("burn_in", 200.0);
        const int ensemble = diag_cfg.value("ensemble", 50);
        const double eps = diag_cfg.value("eps", 1e-3);
        const double horizon = diag_cfg.value("horizon", 30.0);
        auto lyap_full =
            lyapunov_full_dde(system, def.training.initial_histories.front(), burn_in,
                              ensemble, eps, horizon, def.training.dt,
                              def.fit.embedding, seed);
        auto lyap_model = lyapunov_reduced_model(model, eta0, ensemble, eps, horizon,
                                                 seed + 1);
        Eigen::MatrixXd ly_rows(lyap_full.times.size(), 3);
        for (size_t i = 0; i < lyap_full.times.size(); ++i) {
            ly_rows.row(i) << lyap_full.times[i], lyap_full.mean_normalized[i],
                i < lyap_model.mean_normalized.size() ? lyap_model.mean_normalized[i]
                                                      : 0.0;
        }
        write_matrix_csv(ly_rows, "t,delta_full,delta_model", run.path("lyapunov.csv"));
        run.record("lyapunov.csv");
        summary["lambda_full"] = lyap_full.lambda;
        summary["lambda_model"] = lyap_model.lambda;
    }

    std::ofstream(run.path("diagnostics.json")) << summary.dump(2) << "\n";
    run.record("diagnostics.json");
    run.finish();
    return 0;
}

int cmd_parametric(const std::string& config_path, const std::string& out_dir) {
    const std::string bytes = read_file(config_path);
    const json cfg = load_config(config_path);
    Run run(out_dir, bytes, cfg.value("seed", 1));
    ExperimentDef def = experiment_from_config(cfg);

    auto family = run_parametric_fit(def);
    for (size_t i = 0; i < family.nodes().size(); ++i) {
        const std::string name = "node_" + std::to_string(i) + ".json";
        save_model_json(family.models()[i], run.path(name));
        run.record(name);
    }

    json report;
    report["nodes"] = family.nodes();
    json unseen = json::array();
    if (cfg.contains("parametric") && cfg["parametric"].contains("unseen")) {
        for (double mu : cfg["parametric"]["unseen"].get<std::vector<double>>()) {
            auto model = family.at(mu);
            DataSpec ts = def.tests;
            ts.overrides["tau"] = mu;
            std::vector<Trajectory> tests;
            for (const auto& t : make_dataset(def, ts))
                tests.push_back(trim_head(t, def.test_trim));
            auto reports = predict_tests(model, tests);
            unseen.push_back({{"mu", mu}, {"nmte", mean_nmte(reports)}});
        }
    }
    report["unseen"] = unseen;
    std::ofstream(run.path("parametric.json")) << report.dump(2) << "\n";
    run.record("parametric.json");
    run.finish();
    return 0;
}

int cmd_bifurcate(const std::string& config_path, const std::string& out_dir) {
    const std::string bytes = read_file(config_path);
    const json cfg = load_config(config_path);
    Run run(out_dir, bytes, cfg.value("seed", 1));
    ExperimentDef def = experiment_from_config(cfg);

    auto family = run_parametric_fit(def);
    auto section = PoincareSection::default_for(def.fit.d);
    FoldScanOptions opts;
    opts.default_seed_count = 40;
    opts.seed_radius = cfg.value("scan", json::object()).value("seed_radius", 2.0);
    opts.search.min_amplitude = cfg.value("scan", json::object()).value("min_amplitude", 0.05);
    auto diagram = fold_scan(family, section, def.scan_grid, opts);

    std::FILE* f = std::fopen(run.path("diagram.csv").c_str(), "w");
    std::fprintf(f, "mu,section_coord,abs_P_prime,stable\n");
    for (const auto& pt : diagram.points)
        for (const auto& c : pt.cycles)
            std::fprintf(f, "%.12e,%.12e,%.12e,%d\n", pt.mu, c.x, std::abs(c.map_slope),
                         c.stable ? 1 : 0);
    std::fclose(f);
    run.record("diagram.csv");

    json folds;
    folds["folds"] = diagram.folds;
    folds["gaps"] = diagram.gaps;
    std::ofstream(run.path("folds.json")) << folds.dump(2) << "\n";
    run.record("folds.json");
    run.finish();
    return 0;
}

int cmd_oracle(const std::string& out_dir, double r, double K, double tau) {
    Run run(out_dir, "oracle", 1);
    auto eig = oracle::eig_setup(r, K, tau);
    auto model = oracle::solve_order2(eig);
    oracle::solve_order3(model);

    json out;
    out["lambda"] = {{"re", eig.lambda.real()}, {"im", eig.lambda.imag()}};
    json coeffs;
    for (const auto& [jk, b] : model.beta) {
        const std::string key = std::to_string(jk.first) + std::to_string(jk.second);
        coeffs[key] = {{"re", b.real()}, {"im", b.imag()}};
    }
    out["reduced_dynamics"] = coeffs;
    json nonres = json::array();
    for (double v : oracle::check_nonresonance(eig)) nonres.push_back(v);
    out["nonresonance"] = nonres;
    out["gauge_residual"] = oracle::gauge_residual(model);
    out["reality_residual"] = oracle::reality_residual(model);
    out["interior_residual"] = oracle::interior_residual(model);
    std::ofstream(run.path("oracle.json")) << out.dump(2) << "\n";
    run.record("oracle.json");
    run.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SSM-reduced modeling of delay systems"};
    app.require_subcommand(1);

    std::string config, out = "out", model_path, data_dir;
    bool sweep = false;
    double oracle_r = 1.8, oracle_K = 10.0, oracle_tau = 1.0;

    auto* sim = app.add_subcommand("simulate", "generate trajectory data");
    sim->add_option("--config", config)->required();
    sim->add_option("--out", out);

    auto* spec = app.add_subcommand("spectrum", "characteristic roots in a window");
    spec->add_option("--config", config)->required();
    spec->add_option("--out", out);

    auto* fit = app.add_subcommand("fit", "fit an SSM-reduced model");
    fit->add_option("--config", config)->required();
    fit->add_option("--out", out);
    fit->add_option("--data", data_dir, "read training trajectories from a directory");
    fit->add_flag("--sweep-orders", sweep, "grid-search manifold/dynamics orders");

    auto* pred = app.add_subcommand("predict", "score test trajectories");
    pred->add_option("--config", config)->required();
    pred->add_option("--model", model_path)->required();
    pred->add_option("--out", out);
    pred->add_option("--data", data_dir);

    auto* diag = app.add_subcommand("diagnose", "chaos diagnostics for a model");
    diag->add_option("--config", config)->required();
    diag->add_option("--model", model_path)->required();
    diag->add_option("--out", out);

    auto* par = app.add_subcommand("parametric", "fit a parameter-indexed family");
    par->add_option("--config", config)->required();
    par->add_option("--out", out);

    auto* bif = app.add_subcommand("bifurcate", "limit-cycle census and folds");
    bif->add_option("--config", config)->required();
    bif->add_option("--out", out);

    auto* orc = app.add_subcommand("oracle", "equation-driven Hutchinson reduction");
    orc->add_option("--out", out);
    orc->add_option("--r", oracle_r);
    orc->add_option("--K", oracle_K);
    orc->add_option("--tau", oracle_tau);

    auto* sys = app.add_subcommand("systems", "catalog utilities");
    auto* lst = sys->add_subcommand("list", "dump catalog names and defaults");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) return cmd_simulate(config, out);
        if (*spec) return cmd_spectrum(config, out);
        if (*fit) return cmd_fit(config, out, data_dir, sweep);
        if (*pred) return cmd_predict(config, model_path, out, data_dir);
        if (*diag) return cmd_diagnose(config, model_path, out);
        if (*par) return cmd_parametric(config, out);
        if (*bif) return cmd_bifurcate(config, out);
        if (*orc) return cmd_oracle(out, oracle_r, oracle_K, oracle_tau);
        if (*lst) return cmd_systems_list();
        if (*sys) {
            std::cerr << "usage: ssmdelay systems list\n";
            return 2;
        }
    } catch (const ConfigError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const CatalogError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const DivergedError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
