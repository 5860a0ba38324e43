#include "ssmdelay/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "ssmdelay/errors.hpp"

namespace ssmdelay {

void Trajectory::validate() const {
    if (dt <= 0.0) throw ConfigError("trajectory dt must be positive");
    if (samples.rows() < 2) throw ConfigError("trajectory needs at least 2 samples");
    if (!samples.allFinite()) throw ConfigError("trajectory contains non-finite samples");
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw ConfigError("cannot open for writing: " + path);
    std::fputs("t", f);
    for (int j = 0; j < traj.dim(); ++j) std::fprintf(f, ",x%d", j + 1);
    std::fputc('\n', f);
    for (int i = 0; i < traj.size(); ++i) {
        std::fprintf(f, "%.12e", traj.time(i));
        for (int j = 0; j < traj.dim(); ++j) std::fprintf(f, ",%.12e", traj.samples(i, j));
        std::fputc('\n', f);
    }
    std::fclose(f);
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty trajectory file: " + path);

    std::vector<std::vector<double>> rows;
    std::vector<double> times;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        bool first = true;
        while (std::getline(ss, cell, ',')) {
            double v = std::strtod(cell.c_str(), nullptr);
            if (first) {
                times.push_back(v);
                first = false;
            } else {
                row.push_back(v);
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw ConfigError("trajectory file has fewer than 2 rows: " + path);

    Trajectory traj;
    traj.t0 = times.front();
    traj.dt = times[1] - times[0];
    traj.samples.resize(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw ConfigError("ragged trajectory file: " + path);
        for (size_t j = 0; j < rows[i].size(); ++j)
            traj.samples(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
    traj.validate();
    return traj;
}

}  // namespace ssmdelay
