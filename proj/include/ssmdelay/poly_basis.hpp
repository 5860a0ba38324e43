#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

namespace ssmdelay {

/// Multivariate monomial basis eta^alpha for alpha in N^d with
/// degree_lo <= |alpha| <= degree_hi, in graded lexicographic order.
class MultiIndexBasis {
public:
    MultiIndexBasis() = default;
    static MultiIndexBasis create(int d, int degree_lo, int degree_hi);

    int dim() const { return d_; }
    int degree_lo() const { return lo_; }
    int degree_hi() const { return hi_; }
    int size() const { return static_cast<int>(indices_.size()); }
    const std::vector<int>& index(int i) const { return indices_[i]; }
    int position(const std::vector<int>& alpha) const;

    /// Number of monomials of exact degree k in d variables, binom(d+k-1, k).
    static long long degree_count(int d, int k);

    void evaluate(const Eigen::VectorXd& eta, Eigen::VectorXd& out) const;
    Eigen::VectorXd evaluate(const Eigen::VectorXd& eta) const;

    /// Row i holds the monomials of etas.row(i).
    Eigen::MatrixXd evaluate_rows(const Eigen::MatrixXd& etas) const;

    /// Jacobian of the monomial vector at eta (size x d).
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& eta) const;

    /// Matrix T with m(A xi) = T m(xi) for a linear map eta = A xi. Defined
    /// degree-block by degree-block (homogeneous recomposition).
    Eigen::MatrixXd linear_recompose(const Eigen::MatrixXd& A) const;

private:
    int d_ = 0, lo_ = 0, hi_ = 0;
    std::vector<std::vector<int>> indices_;
    std::map<std::vector<int>, int> positions_;
};

}  // namespace ssmdelay
