#pragma once

#include <Eigen/Dense>

namespace ssmdelay {

/// Initial datum u in C([-tau,0]; R^n). Either a constant vector or a sampled
/// segment on the solver grid covering exactly [-tau, 0].
struct HistorySpec {
    enum class Kind { Constant, Sampled };

    Kind kind = Kind::Constant;
    Eigen::VectorXd value;     // Constant
    Eigen::MatrixXd samples;   // Sampled: (M+1) x n, row m at theta = -tau + m*dt
    Eigen::MatrixXd derivs;    // Sampled: optional matching derivatives (may be empty)
    double dt = 0.0;           // Sampled grid step

    static HistorySpec constant(const Eigen::VectorXd& v) {
        HistorySpec h;
        h.kind = Kind::Constant;
        h.value = v;
        return h;
    }

    static HistorySpec sampled(const Eigen::MatrixXd& samples, double dt,
                               const Eigen::MatrixXd& derivs = Eigen::MatrixXd()) {
        HistorySpec h;
        h.kind = Kind::Sampled;
        h.samples = samples;
        h.derivs = derivs;
        h.dt = dt;
        return h;
    }

    int dim() const {
        return kind == Kind::Constant ? static_cast<int>(value.size())
                                      : static_cast<int>(samples.cols());
    }

    /// Span tau covered by this history (only meaningful for Sampled).
    double span() const {
        return kind == Kind::Sampled ? dt * (samples.rows() - 1) : 0.0;
    }
};

}  // namespace ssmdelay
