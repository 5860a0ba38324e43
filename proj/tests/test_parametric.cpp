#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ssmdelay/errors.hpp"
#include "ssmdelay/parametric.hpp"

using namespace ssmdelay;

namespace {

/// Hopf normal form rdot = r(mu - r^2), thetadot = omega as a 2D PolyField
/// model (identity-like embedding into R^5).
SSMModel hopf_model(double mu, double omega) {
    SSMModel model;
    model.k = 5;
    model.d = 2;
    model.V1 = Eigen::MatrixXd::Zero(5, 2);
    model.V1(0, 0) = 1.0;
    model.V1(1, 1) = 1.0;
    model.V_nl = Eigen::MatrixXd::Zero(5, 0);
    model.anchor = Eigen::VectorXd::Zero(5);
    model.dt_model = 0.01;
    PolyField pf;
    pf.basis = MultiIndexBasis::create(2, 1, 3);
    pf.R = Eigen::MatrixXd::Zero(2, pf.basis.size());
    pf.R(0, 0) = mu;
    pf.R(0, 1) = -omega;
    pf.R(1, 0) = omega;
    pf.R(1, 1) = mu;
    pf.R(0, pf.basis.position({3, 0})) = -1.0;  // -eta1 (eta1^2+eta2^2)
    pf.R(0, pf.basis.position({1, 2})) = -1.0;
    pf.R(1, pf.basis.position({2, 1})) = -1.0;  // -eta2 (eta1^2+eta2^2)
    pf.R(1, pf.basis.position({0, 3})) = -1.0;
    model.dynamics = pf;
    return model;
}

SSMModel linear_focus_model(double a, double b) {
    SSMModel model = hopf_model(0.0, b);
    PolyField pf = model.polyfield();
    pf.R.setZero();
    pf.R(0, 0) = a;
    pf.R(0, 1) = -b;
    pf.R(1, 0) = b;
    pf.R(1, 1) = a;
    model.dynamics = pf;
    return model;
}

}  // namespace

TEST_CASE("poincare map: Hopf normal form fixed point at sqrt(mu)") {
    const double mu = 0.04, omega = 1.0;
    auto model = hopf_model(mu, omega);
    auto section = PoincareSection::default_for(2);

    // The counterclockwise flow crosses eta1 = 0 upward at eta2 < 0.
    auto cycles = find_limit_cycles(model, section, {-0.1, -0.15, -0.3});
    REQUIRE(cycles.size() == 1);
    CHECK(std::abs(cycles[0].x - (-std::sqrt(mu))) < 1e-6);
    CHECK(cycles[0].stable);
    const double expected_slope = std::exp(-4.0 * M_PI * mu / omega);
    CHECK(std::abs(std::abs(cycles[0].map_slope) - expected_slope) < 1e-3);
    CHECK(std::abs(cycles[0].return_time - 2.0 * M_PI / omega) < 1e-3);

    // Flow consistency: one return closes the loop on the section.
    auto ret = poincare_map(model, section, cycles[0].x);
    CHECK(std::abs(ret.x - cycles[0].x) < 1e-7);
    CHECK((model.lift(ret.eta) - model.lift(section.point(cycles[0].x))).norm() < 1e-7);
}

TEST_CASE("poincare map: linear focus contraction factor") {
    const double a = -0.1, b = 1.0;
    auto model = linear_focus_model(a, b);
    auto section = PoincareSection::default_for(2);
    const double x0 = -0.5;
    auto ret = poincare_map(model, section, x0);
    const double expected = std::exp(2.0 * M_PI * a / b) * x0;
    CHECK(std::abs(ret.x - expected) < 1e-8);
    CHECK(std::abs(ret.time - 2.0 * M_PI / b) < 1e-6);
}

TEST_CASE("poincare map: no return raises") {
    // Pure contraction toward the origin never re-crosses with orientation.
    auto model = linear_focus_model(-5.0, 0.3);
    auto section = PoincareSection::default_for(2);
    PoincareOptions opts;
    opts.max_time = 3.0;
    CHECK_THROWS_AS(poincare_map(model, section, -1.0, opts), NumericError);
}

TEST_CASE("parametric interpolation reproduces nodes") {
    std::vector<double> nodes = {0.01, 0.03, 0.05, 0.07, 0.09};
    std::vector<SSMModel> models;
    for (double mu : nodes) models.push_back(hopf_model(mu, 1.0));

    for (auto scheme : {ParametricSSM::Scheme::Linear, ParametricSSM::Scheme::CubicSpline}) {
        auto family = ParametricSSM::create(nodes, models, scheme);
        for (double mu : nodes) {
            auto m = family.at(mu);
            CHECK((m.V1 - models[0].V1).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((m.polyfield().R - hopf_model(mu, 1.0).polyfield().R)
                      .cwiseAbs()
                      .maxCoeff() < 1e-12);
        }
        // Linear-in-mu coefficients interpolate exactly in between as well.
        auto mid = family.at(0.04);
        CHECK((mid.polyfield().R - hopf_model(0.04, 1.0).polyfield().R)
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
    }

    // Constant family: any mu returns the node model.
    auto family = ParametricSSM::create({0.0, 1.0},
                                        {hopf_model(0.05, 1.0), hopf_model(0.05, 1.0)});
    auto m = family.at(0.31);
    CHECK((m.polyfield().R - hopf_model(0.05, 1.0).polyfield().R).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK_THROWS_AS(family.at(1.5), ConfigError);  // no extrapolation
}

TEST_CASE("gauge alignment: rotated node models interpolate consistently") {
    // Same dynamics stored in a rotated tangent gauge must not corrupt the
    // interpolant.
    auto base_a = hopf_model(0.04, 1.0);
    auto base_b = hopf_model(0.04, 1.0);
    Eigen::Matrix2d Q;
    const double c = std::cos(0.9), s = std::sin(0.9);
    Q << c, -s, s, c;
    base_b.V1 = base_b.V1 * Q;
    PolyField pf = base_b.polyfield();
    pf.R = Q.transpose() * pf.R * pf.basis.linear_recompose(Q);
    base_b.dynamics = std::move(pf);

    auto family = ParametricSSM::create({0.0, 1.0}, {base_a, base_b});
    auto mid = family.at(0.5);

    // The projector and the lifted flow agree with the unrotated model.
    CHECK((mid.V1 * mid.V1.transpose() - base_a.V1 * base_a.V1.transpose())
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    testutil::Rng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(5);
        y(0) = rng.uniform(-0.3, 0.3);
        y(1) = rng.uniform(-0.3, 0.3);
        const Eigen::VectorXd fa = base_a.lift(base_a.advance(base_a.reduce(y), 0.05));
        const Eigen::VectorXd fм = mid.lift(mid.advance(mid.reduce(y), 0.05));
        CHECK((fa - fм).norm() < 1e-9);
    }
}

TEST_CASE("fold scan: saddle-node map family folds at zero") {
    auto family = [](double mu) {
        return [mu](double x) { return x + mu - x * x; };
    };
    std::vector<double> grid;
    for (double mu = -0.095; mu <= 0.106; mu += 0.02) grid.push_back(mu);
    std::vector<double> seeds;
    for (double x = -1.0; x <= 1.01; x += 0.1) seeds.push_back(x);
    auto scan = fold_scan_map_family(family, grid, seeds, 1e-5);
    REQUIRE(scan.folds.size() == 1);
    CHECK(std::abs(scan.folds[0]) < 1e-4);
    // Counts differ by exactly 2 across the fold.
    int below = -1, above = -1;
    for (size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < scan.folds[0] - 0.01) below = static_cast<int>(scan.points[i].size());
        if (grid[i] > scan.folds[0] + 0.01 && above < 0)
            above = static_cast<int>(scan.points[i].size());
    }
    CHECK(below == 0);
    CHECK(above == 2);
}

TEST_CASE("fold scan: Hopf branch has no folds") {
    std::vector<double> nodes = {0.01, 0.05, 0.09};
    std::vector<SSMModel> models;
    for (double mu : nodes) models.push_back(hopf_model(mu, 1.0));
    auto family = ParametricSSM::create(nodes, models);
    auto section = PoincareSection::default_for(2);

    std::vector<double> grid = {0.015, 0.03, 0.045, 0.06, 0.075};
    FoldScanOptions opts;
    opts.seed_radius = 0.6;
    opts.search.min_amplitude = 0.02;
    auto diagram = fold_scan(family, section, grid, opts);
    CHECK(diagram.folds.empty());
    CHECK(diagram.gaps.empty());
    double prev_amp = 0.0;
    for (const auto& pt : diagram.points) {
        REQUIRE(pt.cycles.size() == 1);
        CHECK(std::abs(pt.cycles[0].x - (-std::sqrt(pt.mu))) < 1e-4);
        CHECK(std::abs(pt.cycles[0].x) > prev_amp);  // amplitude grows with mu
        prev_amp = std::abs(pt.cycles[0].x);
    }
}

TEST_CASE("odd symmetry defect vanishes for an odd field") {
    auto model = hopf_model(0.03, 1.0);  // linear + cubic terms only: odd
    std::vector<Eigen::VectorXd> samples;
    testutil::Rng rng(23);
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd eta(2);
        eta << rng.uniform(-1, 1), rng.uniform(-1, 1);
        samples.push_back(eta);
    }
    CHECK(odd_symmetry_defect(model, samples) < 1e-14);
}
