#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ssmdelay/history.hpp"
#include "ssmdelay/trajectory.hpp"

namespace testutil {

/// Deterministic 64-bit generator (splitmix64); keeps test data portable.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform(double lo, double hi) {
        const double u = (next() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

private:
    uint64_t state_;
};

/// Sup-norm difference of two runs of the same system sampled on nested
/// grids; compares at the coarse grid's times.
inline double sup_diff_on_coarse(const ssmdelay::Trajectory& coarse,
                                 const ssmdelay::Trajectory& fine,
                                 double t_min = 0.0) {
    const long long ratio = std::llround(coarse.dt / fine.dt);
    double worst = 0.0;
    for (int i = 0; i < coarse.size(); ++i) {
        if (coarse.time(i) < t_min) continue;
        const long long j = i * ratio;
        if (j >= fine.size()) break;
        worst = std::max(worst,
                         (coarse.samples.row(i) - fine.samples.row(j)).cwiseAbs().maxCoeff());
    }
    return worst;
}

/// Smooth band-limited scalar history on [-tau, 0] as a sampled segment.
inline ssmdelay::HistorySpec random_smooth_history(Rng& rng, double tau, double dt,
                                                   double amplitude) {
    const int m = static_cast<int>(std::llround(tau / dt));
    const double a0 = rng.uniform(-amplitude, amplitude);
    const double a1 = rng.uniform(-amplitude, amplitude);
    const double w1 = rng.uniform(0.5, 2.0);
    const double a2 = rng.uniform(-amplitude, amplitude);
    const double w2 = rng.uniform(0.5, 2.0);
    Eigen::MatrixXd samples(m + 1, 1);
    for (int i = 0; i <= m; ++i) {
        const double th = -tau + i * dt;
        samples(i, 0) = a0 + a1 * std::sin(w1 * th) + a2 * std::cos(w2 * th);
    }
    return ssmdelay::HistorySpec::sampled(samples, dt);
}

}  // namespace testutil
