#include "ssmdelay/embedding.hpp"

#include <cmath>
#include <cstdio>

#include "ssmdelay/errors.hpp"

namespace ssmdelay {

Eigen::MatrixXd fd4_matrix_derivative(const Eigen::MatrixXd& y, double dt) {
    const int n = static_cast<int>(y.rows());
    Eigen::MatrixXd d(n, y.cols());
    if (n < 5) throw ConfigError("derivative estimation needs >= 5 rows");
    for (int i = 0; i < n; ++i) {
        if (i >= 2 && i <= n - 3) {
            d.row(i) = (y.row(i - 2) - 8.0 * y.row(i - 1) + 8.0 * y.row(i + 1) -
                        y.row(i + 2)) /
                       (12.0 * dt);
        } else {
            const bool fwd = i < 2;
            const int o = fwd ? i : n - 1 - i;
            const int b = fwd ? 0 : n - 5;
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

EmbeddedData embed(const std::vector<Trajectory>& trajectories,
                   const EmbeddingConfig& cfg) {
    const int nc = cfg.channels();
    if (nc < 1) throw ConfigError("embedding needs at least one observable");
    if (cfg.k < 1 || cfg.k % nc != 0)
        throw ConfigError("embedding dimension must be a positive multiple of the channel count");
    if (cfg.lag_steps < 1) throw ConfigError("lag_steps must be >= 1");

    const int lags = cfg.lags();
    EmbeddedData data;
    data.dt = 0.0;
    data.config = cfg;

    int total_rows = 0;
    std::vector<std::pair<int, int>> usable;  // (traj index, rows)
    for (size_t ti = 0; ti < trajectories.size(); ++ti) {
        const auto& traj = trajectories[ti];
        for (int c : cfg.observable)
            if (c < 0 || c >= traj.dim())
                throw ConfigError("observable index out of range");
        const int skip = static_cast<int>(std::ceil(cfg.skip_time / traj.dt - 1e-9));
        const int rows = traj.size() - skip - (lags - 1) * cfg.lag_steps;
        if (rows < 1) {
            ++data.skipped_trajectories;
            continue;
        }
        usable.emplace_back(static_cast<int>(ti), rows);
        total_rows += rows;
    }
    if (usable.empty())
        throw ConfigError("no trajectory is long enough to embed");

    data.Y.resize(total_rows, cfg.k);
    data.traj_id.resize(total_rows);
    data.row_time.resize(total_rows);

    int at = 0;
    for (auto [ti, rows] : usable) {
        const auto& traj = trajectories[ti];
        if (data.dt == 0.0)
            data.dt = traj.dt;
        else if (std::abs(traj.dt - data.dt) > 1e-12 * data.dt)
            throw ConfigError("all embedded trajectories must share dt");
        const int skip = static_cast<int>(std::ceil(cfg.skip_time / traj.dt - 1e-9));
        data.segments.emplace_back(at, at + rows);
        for (int i = 0; i < rows; ++i, ++at) {
            const int base = skip + i;
            for (int j = 0; j < lags; ++j)
                for (int c = 0; c < nc; ++c)
                    data.Y(at, j * nc + c) =
                        traj.samples(base + j * cfg.lag_steps, cfg.observable[c]);
            data.traj_id[at] = ti;
            data.row_time[at] = traj.time(base);
        }
    }
    return data;
}

Eigen::VectorXd embed_row(const Trajectory& traj, const EmbeddingConfig& cfg,
                          int start_index) {
    const int nc = cfg.channels();
    const int lags = cfg.lags();
    if (start_index + (lags - 1) * cfg.lag_steps >= traj.size())
        throw ConfigError("trajectory too short to embed one row");
    Eigen::VectorXd row(cfg.k);
    for (int j = 0; j < lags; ++j)
        for (int c = 0; c < nc; ++c)
            row(j * nc + c) =
                traj.samples(start_index + j * cfg.lag_steps, cfg.observable[c]);
    return row;
}

void estimate_derivatives(EmbeddedData& data) {
    data.dY.resize(data.rows(), data.k());
    for (auto [begin, end] : data.segments) {
        if (end - begin < 5)
            throw ConfigError("derivative estimation needs >= 5 rows per trajectory");
        data.dY.middleRows(begin, end - begin) =
            fd4_matrix_derivative(data.Y.middleRows(begin, end - begin), data.dt);
    }
}

double flatten_order(const EmbeddedData& data, int m) {
    const int k = data.k();
    if (m < 0 || m >= k) throw ConfigError("flatten_order requires 0 <= m < k");
    Eigen::MatrixXd V(k, m + 1);
    for (int l = 0; l <= m; ++l)
        for (int i = 0; i < k; ++i)
            V(i, l) = (l == 0) ? 1.0 : std::pow(static_cast<double>(i), l);
    // Orthonormal basis of the subspace; projection residual per row.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(k, m + 1);
    double acc = 0.0;
    for (int i = 0; i < data.rows(); ++i) {
        const Eigen::VectorXd y = data.Y.row(i).transpose();
        acc += (y - Q * (Q.transpose() * y)).squaredNorm();
    }
    return std::sqrt(acc / data.rows());
}

void write_embedded_csv(const EmbeddedData& data, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ConfigError("cannot open for writing: " + path);
    std::fputs("traj_id,t", f);
    for (int j = 0; j < data.k(); ++j) std::fprintf(f, ",y%d", j + 1);
    if (data.has_derivatives())
        for (int j = 0; j < data.k(); ++j) std::fprintf(f, ",dy%d", j + 1);
    std::fputc('\n', f);
    for (int i = 0; i < data.rows(); ++i) {
        std::fprintf(f, "%d,%.12e", data.traj_id[i], data.row_time[i]);
        for (int j = 0; j < data.k(); ++j) std::fprintf(f, ",%.12e", data.Y(i, j));
        if (data.has_derivatives())
            for (int j = 0; j < data.k(); ++j) std::fprintf(f, ",%.12e", data.dY(i, j));
        std::fputc('\n', f);
    }
    std::fclose(f);
}

}  // namespace ssmdelay
