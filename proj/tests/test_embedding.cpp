#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ssmdelay/embedding.hpp"
#include "ssmdelay/errors.hpp"

using namespace ssmdelay;

namespace {

Trajectory series(const std::vector<double>& values, double dt = 1.0) {
    Trajectory traj;
    traj.t0 = 0.0;
    traj.dt = dt;
    traj.samples.resize(static_cast<int>(values.size()), 1);
    for (size_t i = 0; i < values.size(); ++i) traj.samples(static_cast<int>(i), 0) = values[i];
    return traj;
}

Trajectory sampled(double dt, int n, const std::function<double(double)>& f) {
    Trajectory traj;
    traj.t0 = 0.0;
    traj.dt = dt;
    traj.samples.resize(n, 1);
    for (int i = 0; i < n; ++i) traj.samples(i, 0) = f(i * dt);
    return traj;
}

}  // namespace

TEST_CASE("embed stacks lagged samples") {
    EmbeddingConfig cfg;
    cfg.k = 3;
    cfg.lag_steps = 1;
    auto data = embed({series({1, 2, 3, 4, 5})}, cfg);
    REQUIRE(data.rows() == 3);
    CHECK(data.Y(0, 0) == 1);
    CHECK(data.Y(0, 1) == 2);
    CHECK(data.Y(0, 2) == 3);
    CHECK(data.Y(1, 0) == 2);
    CHECK(data.Y(2, 2) == 5);
    // De-embedding column 0 returns the source segment bit-exactly.
    for (int i = 0; i < 3; ++i) CHECK(data.Y(i, 0) == i + 1.0);
}

TEST_CASE("constant series embeds to constant rows") {
    EmbeddingConfig cfg;
    cfg.k = 4;
    auto data = embed({series(std::vector<double>(20, 3.25))}, cfg);
    CHECK((data.Y.array() == 3.25).all());
    CHECK(flatten_order(data, 0) < 1e-14);
}

TEST_CASE("short trajectories are skipped; all skipped is an error") {
    EmbeddingConfig cfg;
    cfg.k = 4;
    cfg.lag_steps = 3;
    auto data = embed({series({1, 2, 3}), series({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11})}, cfg);
    CHECK(data.skipped_trajectories == 1);
    CHECK(data.rows() == 2);
    CHECK_THROWS_AS(embed({series({1, 2, 3})}, cfg), ConfigError);
}

TEST_CASE("multivariate channels interleave per lag") {
    Trajectory traj;
    traj.t0 = 0;
    traj.dt = 1.0;
    traj.samples.resize(5, 2);
    for (int i = 0; i < 5; ++i) {
        traj.samples(i, 0) = i;         // channel a
        traj.samples(i, 1) = 100 + i;   // channel b
    }
    EmbeddingConfig cfg;
    cfg.observable = {0, 1};
    cfg.k = 6;  // 3 lags x 2 channels
    auto data = embed({traj}, cfg);
    REQUIRE(data.rows() == 3);
    CHECK(data.Y(0, 0) == 0);
    CHECK(data.Y(0, 1) == 100);
    CHECK(data.Y(0, 2) == 1);
    CHECK(data.Y(0, 3) == 101);
    CHECK(data.Y(0, 4) == 2);
    CHECK(data.Y(0, 5) == 102);
}

TEST_CASE("derivatives: exact for polynomials up to degree 4") {
    EmbeddingConfig cfg;
    cfg.k = 2;
    const double dt = 0.01;

    auto lin = embed({sampled(dt, 50, [](double t) { return t; })}, cfg);
    estimate_derivatives(lin);
    CHECK((lin.dY.array() - 1.0).abs().maxCoeff() < 1e-10);

    auto quart = embed({sampled(dt, 50, [](double t) { return t * t * t * t; })}, cfg);
    estimate_derivatives(quart);
    double worst = 0.0;
    for (int i = 0; i < quart.rows(); ++i) {
        const double t = quart.row_time[i];
        worst = std::max(worst, std::abs(quart.dY(i, 0) - 4 * t * t * t));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("derivatives: sine accuracy and 4th-order convergence") {
    EmbeddingConfig cfg;
    cfg.k = 2;
    auto err_at = [&](double dt) {
        auto data = embed({sampled(dt, 200, [](double t) { return std::sin(t); })}, cfg);
        estimate_derivatives(data);
        double worst = 0.0;
        for (int i = 0; i < data.rows(); ++i)
            worst = std::max(worst, std::abs(data.dY(i, 0) - std::cos(data.row_time[i])));
        return worst;
    };
    const double e1 = err_at(0.01);
    CHECK(e1 < 1e-8);
    const double e2 = err_at(0.005);
    CHECK(e1 / e2 > 10.0);  // ~16x for a 4th-order stencil
    CHECK(e1 / e2 < 24.0);
}

TEST_CASE("flatten_order hierarchy") {
    EmbeddingConfig cfg;
    cfg.k = 5;

    // Affine-in-time series lies exactly in span{v0, v1}.
    auto affine = embed({sampled(0.1, 40, [](double t) { return 2.0 + 3.0 * t; })}, cfg);
    CHECK(flatten_order(affine, 1) < 1e-12);
    CHECK(flatten_order(affine, 0) > 1e-3);

    // sin t: residual(m=1) << residual(m=0) and O(lag^2) under lag halving.
    auto res1 = [&](double dt) {
        auto data = embed({sampled(dt, 400, [](double t) { return std::sin(t); })}, cfg);
        return flatten_order(data, 1);
    };
    auto data = embed({sampled(0.01, 400, [](double t) { return std::sin(t); })}, cfg);
    CHECK(flatten_order(data, 1) / flatten_order(data, 0) < 0.05);
    const double r = res1(0.01) / res1(0.005);
    CHECK(r > 3.0);
    CHECK(r < 5.0);

    // Nonincreasing in m.
    double prev = flatten_order(data, 0);
    for (int m = 1; m < 4; ++m) {
        const double cur = flatten_order(data, m);
        CHECK(cur <= prev + 1e-15);
        prev = cur;
    }
}

TEST_CASE("sin t rows lie near the Step-5 plane for small lag") {
    EmbeddingConfig cfg;
    cfg.k = 2;
    const double dt = 0.01;
    auto data = embed({sampled(dt, 300, [](double t) { return std::sin(t); })}, cfg);
    const double resid = flatten_order(data, 1);
    CHECK(resid < 10.0 * dt * dt);  // O(lag^2) distance to span{(1,1),(0,1)}
}

TEST_CASE("embedded data serializes with provenance columns") {
    EmbeddingConfig cfg;
    cfg.k = 3;
    auto data = embed({series({1, 2, 3, 4, 5, 6})}, cfg);
    const std::string path = "embedded_prov_test.csv";
    write_embedded_csv(data, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "traj_id,t,y1,y2,y3");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == data.rows());
    in.close();
    std::remove(path.c_str());
}
