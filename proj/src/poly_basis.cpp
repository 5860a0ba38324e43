#include "ssmdelay/poly_basis.hpp"

#include <cmath>

#include "ssmdelay/errors.hpp"

namespace ssmdelay {

namespace {

void gen_degree(int d, int degree, std::vector<int>& current, int pos,
                int remaining, std::vector<std::vector<int>>& out) {
    if (pos == d - 1) {
        current[pos] = remaining;
        out.push_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {  // lex descending in the leading slot
        current[pos] = e;
        gen_degree(d, degree, current, pos + 1, remaining - e, out);
    }
}

}  // namespace

MultiIndexBasis MultiIndexBasis::create(int d, int degree_lo, int degree_hi) {
    if (d < 1 || degree_lo < 0 || degree_hi < degree_lo)
        throw ConfigError("invalid multi-index basis range");
    MultiIndexBasis basis;
    basis.d_ = d;
    basis.lo_ = degree_lo;
    basis.hi_ = degree_hi;
    std::vector<int> current(d, 0);
    for (int deg = degree_lo; deg <= degree_hi; ++deg)
        gen_degree(d, deg, current, 0, deg, basis.indices_);
    for (int i = 0; i < basis.size(); ++i) basis.positions_[basis.indices_[i]] = i;
    return basis;
}

int MultiIndexBasis::position(const std::vector<int>& alpha) const {
    auto it = positions_.find(alpha);
    if (it == positions_.end()) throw ConfigError("multi-index outside basis");
    return it->second;
}

long long MultiIndexBasis::degree_count(int d, int k) {
    long long num = 1;
    for (int i = 1; i <= k; ++i) num = num * (d - 1 + i) / i;
    return num;
}

void MultiIndexBasis::evaluate(const Eigen::VectorXd& eta, Eigen::VectorXd& out) const {
    out.resize(size());
    // Power table up to the maximal degree per variable.
    thread_local std::vector<double> pows;
    pows.assign(static_cast<size_t>(d_) * (hi_ + 1), 1.0);
    for (int j = 0; j < d_; ++j)
        for (int p = 1; p <= hi_; ++p)
            pows[j * (hi_ + 1) + p] = pows[j * (hi_ + 1) + p - 1] * eta(j);
    for (int i = 0; i < size(); ++i) {
        double v = 1.0;
        for (int j = 0; j < d_; ++j) v *= pows[j * (hi_ + 1) + indices_[i][j]];
        out(i) = v;
    }
}

Eigen::VectorXd MultiIndexBasis::evaluate(const Eigen::VectorXd& eta) const {
    Eigen::VectorXd out;
    evaluate(eta, out);
    return out;
}

Eigen::MatrixXd MultiIndexBasis::evaluate_rows(const Eigen::MatrixXd& etas) const {
    Eigen::MatrixXd out(etas.rows(), size());
    Eigen::VectorXd row;
    for (int i = 0; i < etas.rows(); ++i) {
        evaluate(etas.row(i).transpose(), row);
        out.row(i) = row.transpose();
    }
    return out;
}

Eigen::MatrixXd MultiIndexBasis::jacobian(const Eigen::VectorXd& eta) const {
    Eigen::MatrixXd J(size(), d_);
    for (int i = 0; i < size(); ++i) {
        for (int j = 0; j < d_; ++j) {
            const int e = indices_[i][j];
            if (e == 0) {
                J(i, j) = 0.0;
                continue;
            }
            double v = e;
            for (int l = 0; l < d_; ++l) {
                const int p = (l == j) ? indices_[i][l] - 1 : indices_[i][l];
                for (int q = 0; q < p; ++q) v *= eta(l);
            }
            J(i, j) = v;
        }
    }
    return J;
}

Eigen::MatrixXd MultiIndexBasis::linear_recompose(const Eigen::MatrixXd& A) const {
    if (A.rows() != d_ || A.cols() != d_)
        throw ConfigError("recomposition map must be d x d");
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(size(), size());

    // Expand (A xi)^alpha by repeated multiplication with the linear forms.
    using Poly = std::map<std::vector<int>, double>;  // homogeneous in xi
    for (int i = 0; i < size(); ++i) {
        Poly poly;
        poly[std::vector<int>(d_, 0)] = 1.0;
        for (int var = 0; var < d_; ++var) {
            for (int rep = 0; rep < indices_[i][var]; ++rep) {
                Poly next;
                for (const auto& [beta, coeff] : poly) {
                    for (int j = 0; j < d_; ++j) {
                        if (A(var, j) == 0.0) continue;
                        std::vector<int> gamma = beta;
                        ++gamma[j];
                        next[gamma] += coeff * A(var, j);
                    }
                }
                poly.swap(next);
            }
        }
        for (const auto& [beta, coeff] : poly) T(i, position(beta)) = coeff;
    }
    return T;
}

}  // namespace ssmdelay
