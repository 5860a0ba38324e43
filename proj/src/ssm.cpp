#include "ssmdelay/ssm.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ssmdelay/errors.hpp"

namespace ssmdelay {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kRbfTikhonov = 1e-10;

Eigen::MatrixXd top_right_singular(const Eigen::MatrixXd& rows, int d) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeThinV);
    return svd.matrixV().leftCols(d);
}

/// Orthonormalize columns, sign-fixed so the largest-magnitude entry of each
/// column is positive (a deterministic gauge).
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& V) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
    Eigen::MatrixXd Q = qr.householderQ() *
                        Eigen::MatrixXd::Identity(V.rows(), V.cols());
    Eigen::MatrixXd Rdiag = qr.matrixQR().topRows(V.cols()).triangularView<Eigen::Upper>();
    for (int j = 0; j < Q.cols(); ++j)
        if (Rdiag(j, j) < 0) Q.col(j) = -Q.col(j);
    return Q;
}

void align_signs(Eigen::MatrixXd& V, const Eigen::MatrixXd& reference) {
    for (int j = 0; j < V.cols(); ++j)
        if (V.col(j).dot(reference.col(j)) < 0) V.col(j) = -V.col(j);
}

/// Least squares with conditioning fallback. Returns X minimizing ||A X - B||
/// (+ ridge); stores the estimated condition number.
Eigen::MatrixXd solve_ls(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         double ridge, bool auto_ridge, FitDiagnostics* diag,
                         const char* what) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    const auto& qrR = qr.matrixR();
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < std::min(qrR.rows(), qrR.cols()); ++i) {
        const double v = std::abs(qrR(i, i));
        dmax = std::max(dmax, v);
        dmin = std::min(dmin, v);
    }
    const double cond = (dmin > 0) ? dmax / dmin : std::numeric_limits<double>::infinity();
    if (diag) diag->condition = cond;

    if (ridge == 0.0 && cond < kConditionLimit) return qr.solve(B);

    double lambda = ridge;
    if (lambda == 0.0) {
        if (!auto_ridge)
            throw NumericError(std::string(what) +
                               ": ill-conditioned basis (cond > 1e12); lower the order "
                               "or rescale the data");
        lambda = 1e-8;
        if (diag) diag->ridge_fallback = true;
    }
    const Eigen::MatrixXd G = A.transpose() * A +
                              lambda * Eigen::MatrixXd::Identity(A.cols(), A.cols());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    if (ldlt.info() != Eigen::Success)
        throw NumericError(std::string(what) + ": normal equations not solvable");
    return ldlt.solve(A.transpose() * B);
}

}  // namespace

Eigen::VectorXd SSMModel::reduce(const Eigen::VectorXd& y) const {
    return V1.transpose() * (y - anchor);
}

Eigen::VectorXd SSMModel::lift(const Eigen::VectorXd& eta) const {
    Eigen::VectorXd y = V1 * eta + anchor;
    if (man_basis.size() > 0) y += V_nl * man_basis.evaluate(eta);
    return y;
}

Eigen::VectorXd SSMModel::field(const Eigen::VectorXd& eta) const {
    const auto& pf = polyfield();
    return pf.R * pf.basis.evaluate(eta);
}

Eigen::VectorXd SSMModel::map_step(const Eigen::VectorXd& eta) const {
    const auto& m = rbf();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < m.centers.rows(); ++i)
        out += (eta - m.centers.row(i).transpose()).norm() *
               m.weights.row(i).transpose();
    return out;
}

Eigen::VectorXd SSMModel::advance(const Eigen::VectorXd& eta, double dt) const {
    if (has_rbf()) return map_step(eta);
    const Eigen::VectorXd k1 = field(eta);
    const Eigen::VectorXd k2 = field(eta + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = field(eta + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = field(eta + dt * k3);
    return eta + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

SSMModel fit_manifold(const EmbeddedData& data, int d, int order,
                      const Eigen::VectorXd& anchor, FitDiagnostics* diag) {
    const int k = data.k();
    if (d < 1 || d > k) throw ConfigError("fit_manifold: need 1 <= d <= k");
    if (order < 1) throw ConfigError("fit_manifold: order must be >= 1");

    SSMModel model;
    model.k = k;
    model.d = d;
    model.anchor = anchor;
    model.embedding = data.config;
    model.dt_model = data.dt;
    if (anchor.size() != k) throw ConfigError("fit_manifold: anchor size mismatch");
    if (k <= 2 * d && !data.config.allow_low_embedding)
        throw ConfigError("fit_manifold: embedding dimension violates k > 2d "
                          "(set allow_low_embedding to override)");

    Eigen::MatrixXd Ya = data.Y.rowwise() - anchor.transpose();
    const int N = static_cast<int>(Ya.rows());

    if (order >= 2) model.man_basis = MultiIndexBasis::create(d, 2, order);
    const int m = (order >= 2) ? model.man_basis.size() : 0;
    if (N < 10 * (d + m))
        throw ConfigError("fit_manifold: need at least 10x as many rows as unknowns");

    Eigen::MatrixXd V1 = top_right_singular(Ya, d);
    Eigen::MatrixXd V_nl = Eigen::MatrixXd::Zero(k, m);

    double best_objective = std::numeric_limits<double>::infinity();
    double prev_objective = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd best_V1 = V1, best_V_nl = V_nl;
    int iterations = 0;

    const int max_iter = (m > 0) ? 100 : 1;
    for (int iter = 0; iter < max_iter; ++iter) {
        ++iterations;
        const Eigen::MatrixXd eta = Ya * V1;                    // N x d
        const Eigen::MatrixXd resid = Ya - eta * V1.transpose();  // complement part
        double objective;
        if (m > 0) {
            const Eigen::MatrixXd Phi = model.man_basis.evaluate_rows(eta);
            Eigen::MatrixXd Wt = solve_ls(Phi, resid, 0.0, true, diag, "fit_manifold");
            V_nl = Wt.transpose();
            V_nl -= V1 * (V1.transpose() * V_nl);  // exact complement projection
            objective = (resid - Phi * V_nl.transpose()).squaredNorm();
            if (objective < best_objective - 1e-300) {
                best_objective = objective;
                best_V1 = V1;
                best_V_nl = V_nl;
            }
            if (iter > 0 && std::abs(prev_objective - objective) <
                                1e-10 * std::max(prev_objective, 1e-300))
                break;
            prev_objective = objective;
            // Residual-corrected data re-fits the tangent space.
            Eigen::MatrixXd corrected = Ya - Phi * V_nl.transpose();
            Eigen::MatrixXd V1_new = top_right_singular(corrected, d);
            align_signs(V1_new, V1);
            V1 = V1_new;
        } else {
            objective = resid.squaredNorm();
            best_objective = objective;
            best_V1 = V1;
        }
    }

    model.V1 = orthonormalize(best_V1);
    if (m > 0) {
        const Eigen::MatrixXd eta = Ya * model.V1;
        const Eigen::MatrixXd resid = Ya - eta * model.V1.transpose();
        const Eigen::MatrixXd Phi = model.man_basis.evaluate_rows(eta);
        Eigen::MatrixXd Wt = solve_ls(Phi, resid, 0.0, true, diag, "fit_manifold");
        model.V_nl = Wt.transpose();
        model.V_nl -= model.V1 * (model.V1.transpose() * model.V_nl);
        best_objective = (resid - Phi * model.V_nl.transpose()).squaredNorm();
    } else {
        model.V_nl = Eigen::MatrixXd::Zero(k, 0);
    }

    if (diag) {
        diag->objective = best_objective;
        diag->iterations = iterations;
    }
    return model;
}

void fit_polyfield(SSMModel& model, const EmbeddedData& data, int order,
                   double ridge, FitDiagnostics* diag) {
    if (!data.has_derivatives())
        throw ConfigError("fit_polyfield: derivative estimates missing");
    PolyField pf;
    pf.basis = MultiIndexBasis::create(model.d, 1, order);

    const Eigen::MatrixXd Ya = data.Y.rowwise() - model.anchor.transpose();
    const Eigen::MatrixXd eta = Ya * model.V1;
    const Eigen::MatrixXd etadot = data.dY * model.V1;
    const Eigen::MatrixXd Phi = pf.basis.evaluate_rows(eta);
    const Eigen::MatrixXd Rt =
        solve_ls(Phi, etadot, ridge, ridge == 0.0, diag, "fit_polyfield");
    pf.R = Rt.transpose();
    model.dynamics = std::move(pf);
    model.dt_model = data.dt;
}

void fit_rbf(SSMModel& model, const EmbeddedData& data, int pair_stride,
             int max_centers) {
    if (pair_stride < 1) throw ConfigError("fit_rbf: pair_stride must be >= 1");
    const Eigen::MatrixXd Ya = data.Y.rowwise() - model.anchor.transpose();
    const Eigen::MatrixXd eta = Ya * model.V1;

    std::vector<int> heads;
    for (auto [begin, end] : data.segments)
        for (int i = begin; i + pair_stride < end; i += pair_stride)
            heads.push_back(i);
    if (heads.empty()) throw ConfigError("fit_rbf: no consecutive pairs available");

    // Strided cap keeps the kernel solve tractable on long runs.
    std::vector<int> kept;
    if (static_cast<int>(heads.size()) > max_centers) {
        const double step = static_cast<double>(heads.size()) / max_centers;
        for (int i = 0; i < max_centers; ++i)
            kept.push_back(heads[static_cast<size_t>(i * step)]);
    } else {
        kept = heads;
    }

    // Deduplicate centers closer than 1e-12.
    std::vector<int> unique_rows;
    for (int row : kept) {
        bool dup = false;
        for (int u : unique_rows)
            if ((eta.row(row) - eta.row(u)).norm() < 1e-12) {
                dup = true;
                break;
            }
        if (!dup) unique_rows.push_back(row);
    }

    const int M = static_cast<int>(unique_rows.size());
    RBFMap map;
    map.centers.resize(M, model.d);
    Eigen::MatrixXd targets(M, model.d);
    for (int i = 0; i < M; ++i) {
        map.centers.row(i) = eta.row(unique_rows[i]);
        targets.row(i) = eta.row(unique_rows[i] + pair_stride);
    }
    Eigen::MatrixXd K(M, M);
    for (int i = 0; i < M; ++i) {
        K(i, i) = kRbfTikhonov;
        for (int j = i + 1; j < M; ++j) {
            const double r = (map.centers.row(i) - map.centers.row(j)).norm();
            K(i, j) = r;
            K(j, i) = r;
        }
    }
    map.weights = K.partialPivLu().solve(targets);
    model.dynamics = std::move(map);
    model.dt_model = data.dt * pair_stride;
}

PredictionReport predict(const SSMModel& model, const Trajectory& test) {
    EmbeddingConfig cfg = model.embedding;
    cfg.skip_time = 0.0;
    auto data = embed({test}, cfg);

    const int stride =
        model.has_rbf() ? std::max(1, static_cast<int>(std::llround(model.dt_model / data.dt)))
                        : 1;
    std::vector<int> rows;
    for (int i = 0; i < data.rows(); i += stride) rows.push_back(i);
    const int N = static_cast<int>(rows.size());

    PredictionReport report;
    report.times.resize(N);
    report.test_rows.resize(N, model.k);
    report.model_rows.resize(N, model.k);
    report.reduced_test.resize(N, model.d);
    report.reduced_model.resize(N, model.d);

    const double dt = data.dt * stride;
    Eigen::VectorXd eta = model.reduce(data.Y.row(rows[0]).transpose());
    const double eta_scale = 1.0 + data.Y.rowwise().norm().maxCoeff();

    double err_sum = 0.0, amp = 0.0;
    int filled = 0;
    for (int i = 0; i < N; ++i) {
        const Eigen::VectorXd y_test = data.Y.row(rows[i]).transpose();
        const Eigen::VectorXd y_model = model.lift(eta);
        report.times[i] = data.row_time[rows[i]];
        report.test_rows.row(i) = y_test.transpose();
        report.model_rows.row(i) = y_model.transpose();
        report.reduced_test.row(i) = model.reduce(y_test).transpose();
        report.reduced_model.row(i) = eta.transpose();
        err_sum += (y_test - y_model).norm();
        amp = std::max(amp, y_test.norm());
        ++filled;
        if (i + 1 < N) {
            eta = model.advance(eta, dt);
            if (!eta.allFinite() || eta.norm() > 1e6 * eta_scale) {
                report.diverged = true;
                break;
            }
        }
    }
    if (filled < N) {
        report.times.resize(filled);
        report.test_rows.conservativeResize(filled, Eigen::NoChange);
        report.model_rows.conservativeResize(filled, Eigen::NoChange);
        report.reduced_test.conservativeResize(filled, Eigen::NoChange);
        report.reduced_model.conservativeResize(filled, Eigen::NoChange);
    }
    report.nmte = (amp > 0 && filled > 0) ? err_sum / (filled * amp) : 0.0;
    return report;
}

std::vector<std::complex<double>> model_eigenvalues(const SSMModel& model) {
    Eigen::MatrixXd A(model.d, model.d);
    if (model.has_polyfield()) {
        // Degree-1 monomials lead the graded basis in coordinate order.
        A = model.polyfield().R.leftCols(model.d);
    } else if (model.has_rbf()) {
        const double h = 1e-6;
        for (int j = 0; j < model.d; ++j) {
            Eigen::VectorXd ep = Eigen::VectorXd::Zero(model.d);
            ep(j) = h;
            A.col(j) = (model.map_step(ep) - model.map_step(-ep)) / (2 * h);
        }
    } else {
        throw ConfigError("model has no dynamics");
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    std::vector<std::complex<double>> eigs;
    for (int i = 0; i < model.d; ++i) {
        std::complex<double> lambda = es.eigenvalues()(i);
        if (model.has_rbf()) lambda = std::log(lambda) / model.dt_model;
        eigs.push_back(lambda);
    }
    std::sort(eigs.begin(), eigs.end(), [](auto a, auto b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return eigs;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const int rows = static_cast<int>(j.size());
    if (rows == 0) return Eigen::MatrixXd(0, 0);
    const int cols = static_cast<int>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
    return m;
}

}  // namespace

void save_model_json(const SSMModel& model, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["k"] = model.k;
    j["d"] = model.d;
    j["dt_model"] = model.dt_model;
    j["V1"] = matrix_to_json(model.V1);
    j["manifold_degree_lo"] = model.man_basis.size() ? model.man_basis.degree_lo() : 0;
    j["manifold_degree_hi"] = model.man_basis.size() ? model.man_basis.degree_hi() : 0;
    j["V_nl"] = matrix_to_json(model.V_nl);
    j["anchor"] = std::vector<double>(model.anchor.data(),
                                      model.anchor.data() + model.anchor.size());
    j["embedding"] = {{"observable", model.embedding.observable},
                      {"k", model.embedding.k},
                      {"lag_steps", model.embedding.lag_steps},
                      {"skip_time", model.embedding.skip_time}};
    if (model.has_polyfield()) {
        j["dynamics"] = {{"type", "poly"},
                         {"degree_hi", model.polyfield().basis.degree_hi()},
                         {"R", matrix_to_json(model.polyfield().R)}};
    } else if (model.has_rbf()) {
        j["dynamics"] = {{"type", "rbf"},
                         {"centers", matrix_to_json(model.rbf().centers)},
                         {"weights", matrix_to_json(model.rbf().weights)}};
    } else {
        j["dynamics"] = {{"type", "none"}};
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

SSMModel load_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open for reading: " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("schema_version", 0) != 1)
        throw ConfigError("unsupported model schema version");
    SSMModel model;
    model.k = j["k"].get<int>();
    model.d = j["d"].get<int>();
    model.dt_model = j["dt_model"].get<double>();
    model.V1 = matrix_from_json(j["V1"]);
    model.V_nl = matrix_from_json(j["V_nl"]);
    if (model.V_nl.size() == 0) model.V_nl.resize(model.k, 0);
    const int hi = j["manifold_degree_hi"].get<int>();
    if (hi >= 2) model.man_basis = MultiIndexBasis::create(model.d, 2, hi);
    const auto& anchor = j["anchor"];
    model.anchor.resize(anchor.size());
    for (size_t i = 0; i < anchor.size(); ++i) model.anchor(i) = anchor[i].get<double>();
    model.embedding.observable = j["embedding"]["observable"].get<std::vector<int>>();
    model.embedding.k = j["embedding"]["k"].get<int>();
    model.embedding.lag_steps = j["embedding"]["lag_steps"].get<int>();
    model.embedding.skip_time = j["embedding"]["skip_time"].get<double>();
    const std::string type = j["dynamics"]["type"].get<std::string>();
    if (type == "poly") {
        PolyField pf;
        pf.basis = MultiIndexBasis::create(model.d, 1, j["dynamics"]["degree_hi"].get<int>());
        pf.R = matrix_from_json(j["dynamics"]["R"]);
        model.dynamics = std::move(pf);
    } else if (type == "rbf") {
        RBFMap map;
        map.centers = matrix_from_json(j["dynamics"]["centers"]);
        map.weights = matrix_from_json(j["dynamics"]["weights"]);
        model.dynamics = std::move(map);
    }
    return model;
}

}  // namespace ssmdelay
