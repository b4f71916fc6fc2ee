#include "doctest.h"

#include "hilfer/model.hpp"
#include "hilfer/solver.hpp"
#include "hilfer/specfun.hpp"

#include <cmath>
#include <vector>

using namespace hilfer;
using solver::ResolventKernels;

namespace {

model::Generator plain_scalar(double lambda) {
    model::Generator g;
    g.kind = model::Generator::Kind::scalar;
    g.lambda = lambda;
    g.bound_M = 1.0;
    return g;
}

model::ProblemSpec base_spec(double alpha, double beta, double lambda, double T) {
    model::ProblemSpec s;
    s.order = fracops::FracOrder(alpha, beta);
    s.mesh.T = T;
    s.gen = plain_scalar(lambda);
    s.nonlin.uses_x2 = s.nonlin.uses_x3 = false;
    s.u0 = 1.0;
    s.delta = 1.0;
    return s;
}

double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max(1e-300, std::fabs(want));
}

// closed-form weighted solution of the scalar linear problem: w(t) =
// u0 E_{alpha,gamma}(lambda t^alpha), valid whether lambda sits in the
// generator or in a forcing term f = lambda x1
double linear_weighted(const model::ProblemSpec& s, double lambda, double t) {
    const double al = s.order.alpha();
    const double ga = s.order.gamma();
    return s.u0 * specfun::mittag_leffler(al, ga, lambda * std::pow(t, al)).value;
}

// sup over interior nodes of the relative error against the closed form
double linear_sup_err(const solver::SolveReport& rep, const model::ProblemSpec& s,
                      double lambda) {
    const auto& seg = rep.trajectory.segments.at(0);
    double worst = 0.0;
    for (std::size_t j = 1; j < seg.nodes.size(); ++j)
        worst = std::max(
            worst, rel_err(seg.w[j], linear_weighted(s, lambda, seg.nodes[j])));
    return worst;
}

} // namespace

// ---------------------------------------------------------------------------
// resolvent kernels

TEST_CASE("classical limit collapses both kernels to the exponential") {
    const fracops::FracOrder order(1.0, 0.3);
    const auto rk = solver::resolvent_kernels(order, plain_scalar(-0.7), 2.0);
    for (double t : {0.0, 0.4, 1.1, 2.0}) {
        CHECK(rk.K_a(t) == doctest::Approx(std::exp(-0.7 * t)).epsilon(1e-12));
        CHECK(rk.P_ab(t) == doctest::Approx(std::exp(-0.7 * t)).epsilon(1e-12));
    }
}

TEST_CASE("zero generator reduces the kernels to bare power laws") {
    const fracops::FracOrder order(0.6, 0.4);
    const double ga = order.gamma();
    const auto rk = solver::resolvent_kernels(order, plain_scalar(0.0), 1.0);
    for (double t : {0.05, 0.3, 0.9}) {
        CHECK(rel_err(rk.K_a(t), std::pow(t, -0.4) / std::tgamma(0.6)) < 1e-13);
        CHECK(rel_err(rk.P_ab(t), std::pow(t, ga - 1.0) / std::tgamma(ga)) < 1e-13);
    }
}

TEST_CASE("the quadrature route reproduces the closed forms") {
    // the two methods share no code beyond the series primitives, so their
    // agreement certifies both
    const fracops::FracOrder order(0.5, 0.5);
    const auto closed = solver::resolvent_kernels(order, plain_scalar(-1.0), 1.0);
    const auto wright = solver::resolvent_kernels(
        order, plain_scalar(-1.0), 1.0, ResolventKernels::Method::wright_quadrature);
    CHECK(wright.method == ResolventKernels::Method::wright_quadrature);
    for (double t : {0.05, 0.2, 0.5, 1.0}) {
        CHECK(rel_err(wright.K_a(t), closed.K_a(t)) < 1e-5);
        CHECK(rel_err(wright.P_ab(t), closed.P_ab(t)) < 1e-5);
    }
}

TEST_CASE("quadrature route handles positive spectra and beta extremes") {
    for (double beta : {0.0, 1.0}) {
        const fracops::FracOrder order(0.7, beta);
        const auto closed = solver::resolvent_kernels(order, plain_scalar(0.5), 1.0);
        const auto wright = solver::resolvent_kernels(
            order, plain_scalar(0.5), 1.0, ResolventKernels::Method::wright_quadrature);
        for (double t : {0.1, 0.6, 1.0})
            CHECK(rel_err(wright.P_ab(t), closed.P_ab(t)) < 1e-5);
    }
}

TEST_CASE("kernels stay finite in weighted form at the origin") {
    // the weighted kernels approach their limits at rate O(t^alpha)
    const fracops::FracOrder order(0.4, 0.6);
    const auto rk = solver::resolvent_kernels(order, plain_scalar(-0.3), 1.0);
    const double t = 1e-8;
    CHECK(rel_err(std::pow(t, 1.0 - order.alpha()) * rk.K_a(t),
                  1.0 / std::tgamma(order.alpha())) < 1e-3);
    CHECK(rel_err(std::pow(t, 1.0 - order.gamma()) * rk.P_ab(t),
                  1.0 / std::tgamma(order.gamma())) < 1e-3);
}

TEST_CASE("resolvent kernel construction rejects what it cannot certify") {
    const fracops::FracOrder order(0.5, 0.5);
    CHECK_THROWS_AS(solver::resolvent_kernels(order, plain_scalar(100.0), 1.0),
                    DomainError); // |lambda| T^alpha beyond the series range
    CHECK_THROWS_AS(solver::resolvent_kernels(order, plain_scalar(-1.0), 0.0),
                    DomainError);
    CHECK_THROWS_AS(
        solver::resolvent_kernels(fracops::FracOrder(1.0, 0.5), plain_scalar(-1.0),
                                  1.0, ResolventKernels::Method::wright_quadrature),
        DomainError);

    model::Generator wide;
    wide.kind = model::Generator::Kind::matrix;
    wide.matrix = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(solver::resolvent_kernels(order, wide, 1.0), DomainError);
}

TEST_CASE("a 1x1 matrix generator behaves exactly like its scalar entry") {
    const fracops::FracOrder order(0.5, 0.5);
    model::Generator one;
    one.kind = model::Generator::Kind::matrix;
    one.matrix = Eigen::MatrixXd::Constant(1, 1, -0.5);
    const auto a = solver::resolvent_kernels(order, one, 1.0);
    const auto b = solver::resolvent_kernels(order, plain_scalar(-0.5), 1.0);
    CHECK(a.K_a(0.7) == b.K_a(0.7));
    CHECK(a.P_ab(0.7) == b.P_ab(0.7));
}

// ---------------------------------------------------------------------------
// contraction constant

TEST_CASE("contraction constant vanishes with all Lipschitz data") {
    auto s = base_spec(0.5, 0.5, -1.0, 1.0);
    CHECK(solver::contraction_lambda(s) == 0.0);
}

TEST_CASE("contraction constant hand checks") {
    auto s = base_spec(0.5, 0.5, 0.0, 1.0);
    s.nonlin.L1 = 0.1;
    CHECK(solver::contraction_lambda(s) == doctest::Approx(0.1).epsilon(1e-14));

    auto s2 = base_spec(0.5, 0.5, 0.0, 1.0);
    s2.delta = 0.5;
    s2.impulses.L_tilde = 0.04;
    CHECK(solver::contraction_lambda(s2) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("contraction constant maximizes over windows") {
    auto s = base_spec(0.5, 0.5, 0.0, 1.0);
    s.mesh.t_times = {0.4};
    s.mesh.s_times = {0.5};
    s.impulses.xi = {[](double, double u) { return 0.5 * u; }};
    s.impulses.L_xi = {0.3};
    s.nonlin.L1 = 0.2;
    // first window: 0.2 * 0.4; post-impulse window: 0.3 + 0.2 * 0.5
    CHECK(solver::contraction_lambda(s) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("contraction constant picks up the Volterra sup-integrals") {
    auto s = base_spec(0.5, 0.5, 0.0, 1.0);
    s.nonlin.L2 = 0.4;
    s.nonlin.uses_x2 = true;
    s.kernels.K = [](double, double) { return 1.0; };
    // L2 * T^{alpha} * (T^{2-alpha}/(2-alpha)) / alpha = 0.4 * (2/3) / 0.5
    CHECK(solver::contraction_lambda(s) == doctest::Approx(8.0 / 15.0).epsilon(1e-9));
}

// ---------------------------------------------------------------------------
// Picard iteration: resolvent-exact paths

TEST_CASE("zero data yields the pure power solution in one step") {
    auto s = base_spec(0.6, 0.3, 0.0, 1.0);
    const auto rep = solver::picard_solve(s, 64, 1e-12, 50);
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
    CHECK(rep.lambda_value == 0.0);
    const double w_want = 1.0 / std::tgamma(s.order.gamma());
    for (const auto& seg : rep.trajectory.segments)
        for (double w : seg.w) CHECK(rel_err(w, w_want) < 1e-14);
}

TEST_CASE("a scalar generator alone is reproduced to machine precision") {
    auto s = base_spec(0.5, 0.5, -0.8, 1.0);
    s.u0 = 1.3;
    const auto rep = solver::picard_solve(s, 128, 1e-13, 50);
    CHECK(rep.converged);
    CHECK(rep.iterations <= 3);
    CHECK(linear_sup_err(rep, s, -0.8) < 1e-13);
}

// ---------------------------------------------------------------------------
// Picard iteration: quadrature-bearing paths

TEST_CASE("linear forcing reproduces the closed form and improves on refinement") {
    auto make = [&]() {
        auto s = base_spec(0.5, 0.5, 0.0, 1.0);
        s.nonlin.f = [](double, double x1, double, double) { return -0.8 * x1; };
        s.nonlin.L1 = 0.8;
        return s;
    };
    const auto s = make();
    const auto coarse = solver::picard_solve(s, 256, 1e-12, 200);
    const auto fine = solver::picard_solve(s, 512, 1e-12, 200);
    CHECK(coarse.converged);
    CHECK(fine.converged);
    CHECK(coarse.lambda_value == doctest::Approx(0.8));
    const double e_coarse = linear_sup_err(coarse, s, -0.8);
    const double e_fine = linear_sup_err(fine, s, -0.8);
    // the sup is taken over every interior node; the first one carries the
    // largest quadrature error and vanishes linearly in the step
    CHECK(e_coarse < 2e-3);
    CHECK(e_fine < 0.8 * e_coarse);
}

TEST_CASE("classical ODE limit: forced exponential decay") {
    auto s = base_spec(1.0, 1.0, 0.0, 1.0);
    s.nonlin.f = [](double, double x1, double, double) { return -0.5 * x1; };
    s.nonlin.L1 = 0.5;
    const auto rep = solver::picard_solve(s, 1024, 1e-13, 100);
    CHECK(rep.converged);
    const auto& seg = rep.trajectory.segments[0];
    for (std::size_t j = 0; j < seg.nodes.size(); j += 128)
        CHECK(rel_err(seg.w[j], std::exp(-0.5 * seg.nodes[j])) < 1e-6);
}

TEST_CASE("classical ODE limit: u' = u grows to e") {
    auto s = base_spec(1.0, 1.0, 0.0, 1.0);
    s.nonlin.f = [](double, double x1, double, double) { return x1; };
    s.nonlin.L1 = 1.0;
    const auto rep = solver::picard_solve(s, 1024, 1e-13, 100);
    CHECK(rep.converged);
    CHECK(rel_err(rep.trajectory.segments[0].w.back(), std::exp(1.0)) < 1e-6);
}

TEST_CASE("memory slots feed back: u'' = u through the first Volterra slot") {
    // u' = int_0^t u ds with u(0) = 1 integrates to cosh
    auto s = base_spec(1.0, 1.0, 0.0, 1.0);
    s.nonlin.f = [](double, double, double x2, double) { return x2; };
    s.nonlin.L2 = 1.0;
    s.nonlin.uses_x2 = true;
    s.kernels.K = [](double, double) { return 1.0; };
    const auto rep = solver::picard_solve(s, 512, 1e-13, 100);
    CHECK(rep.converged);
    CHECK(rel_err(rep.trajectory.segments[0].w.back(), std::cosh(1.0)) < 1e-4);
}

TEST_CASE("memory slots feed back: the second Volterra slot matches the first") {
    auto s = base_spec(1.0, 1.0, 0.0, 1.0);
    s.nonlin.f = [](double, double, double, double x3) { return x3; };
    s.nonlin.L3 = 1.0;
    s.nonlin.uses_x3 = true;
    s.kernels.H = [](double, double) { return 1.0; };
    const auto rep = solver::picard_solve(s, 512, 1e-13, 100);
    CHECK(rep.converged);
    CHECK(rel_err(rep.trajectory.segments[0].w.back(), std::cosh(1.0)) < 1e-4);
}

// ---------------------------------------------------------------------------
// impulse windows and the nonlocal term

TEST_CASE("affine jump relations are resolved exactly across a window") {
    // u = 0.5 u + 1 pins the impulse window at 2, which then propagates
    auto s = base_spec(0.5, 1.0, 0.0, 1.0); // gamma = 1
    s.mesh.t_times = {0.4};
    s.mesh.s_times = {0.6};
    s.impulses.xi = {[](double, double u) { return 0.5 * u + 1.0; }};
    s.impulses.L_xi = {0.5};
    const auto rep = solver::picard_solve(s, 64, 1e-12, 50);
    CHECK(rep.converged);
    REQUIRE(rep.trajectory.segments.size() == 3);
    for (double w : rep.trajectory.segments[0].w) CHECK(rel_err(w, 1.0) < 1e-13);
    for (double w : rep.trajectory.segments[1].w) CHECK(rel_err(w, 2.0) < 1e-13);
    for (double w : rep.trajectory.segments[2].w) CHECK(rel_err(w, 2.0) < 1e-13);
}

TEST_CASE("impulse plumbing carries the weighted blow-up when gamma < 1") {
    auto s = base_spec(0.5, 0.5, 0.0, 1.0); // gamma = 0.75
    const double ga = s.order.gamma();
    s.mesh.t_times = {0.4};
    s.mesh.s_times = {0.6};
    s.impulses.xi = {[](double, double u) { return 0.5 * u + 1.0; }};
    s.impulses.L_xi = {0.5};
    const auto rep = solver::picard_solve(s, 64, 1e-12, 50);
    CHECK(rep.converged);
    const auto& segs = rep.trajectory.segments;
    REQUIRE(segs.size() == 3);
    const double rg = 1.0 / std::tgamma(ga);
    for (double w : segs[0].w) CHECK(rel_err(w, rg) < 1e-13);
    // impulse window stores w = (t - t_1)^{1-gamma} * 2
    CHECK(segs[1].w.front() == 0.0);
    for (std::size_t j = 1; j < segs[1].nodes.size(); ++j) {
        const double want = 2.0 * std::pow(segs[1].nodes[j] - 0.4, 1.0 - ga);
        CHECK(rel_err(segs[1].w[j], want) < 1e-13);
    }
    for (double w : segs[2].w) CHECK(rel_err(w, 2.0 * rg) < 1e-13);
}

TEST_CASE("degenerate and empty windows are lawful") {
    auto s = base_spec(0.5, 0.5, 0.0, 1.0);
    s.mesh.t_times = {0.5};
    s.mesh.s_times = {0.5}; // instantaneous jump
    s.impulses.xi = {[](double, double u) { return 0.5 * u + 1.0; }};
    s.impulses.L_xi = {0.5};
    const auto rep = solver::picard_solve(s, 32, 1e-12, 50);
    CHECK(rep.converged);
    REQUIRE(rep.trajectory.segments.size() == 3);
    CHECK(rep.trajectory.segments[1].nodes.size() == 1);
    const double rg = 1.0 / std::tgamma(s.order.gamma());
    for (double w : rep.trajectory.segments[2].w) CHECK(rel_err(w, 2.0 * rg) < 1e-12);

    auto s2 = base_spec(0.5, 0.5, 0.0, 1.0);
    s2.mesh.t_times = {0.4};
    s2.mesh.s_times = {1.0}; // the trailing evolution window is empty
    s2.impulses.xi = s.impulses.xi;
    s2.impulses.L_xi = {0.5};
    const auto rep2 = solver::picard_solve(s2, 32, 1e-12, 50);
    CHECK(rep2.converged);
    REQUIRE(rep2.trajectory.segments.size() == 3);
    CHECK(rep2.trajectory.segments[2].nodes.size() == 1);
    CHECK(rel_err(rep2.trajectory.segments[2].w[0], 2.0 * rg) < 1e-12);
}

TEST_CASE("an expanding jump relation stalls loudly") {
    auto s = base_spec(0.5, 0.5, 0.0, 1.0);
    s.mesh.t_times = {0.4};
    s.mesh.s_times = {0.6};
    s.impulses.xi = {[](double, double u) { return 3.0 * u + 1.0; }};
    s.impulses.L_xi = {3.0};
    CHECK_THROWS_AS(solver::picard_solve(s, 16, 1e-12, 50), PointwiseImpulseError);
}

TEST_CASE("the nonlocal term shifts the initial coefficient") {
    auto s = base_spec(0.5, 0.5, 0.0, 1.0);
    s.impulses.g = [](const fracops::WeightedTrajectory& traj) {
        return 0.1 * traj.segments.back().w.back();
    };
    s.impulses.L_tilde = 0.1;
    const auto rep = solver::picard_solve(s, 64, 1e-13, 100);
    CHECK(rep.converged);
    // fixed point: wT = (u0 - 0.1 wT)/Gamma(gamma)
    const double rg = std::tgamma(s.order.gamma());
    const double want = 1.0 / (rg + 0.1);
    CHECK(rel_err(rep.trajectory.segments[0].w.back(), want) < 1e-12);
}

// ---------------------------------------------------------------------------
// convergence diagnostics

TEST_CASE("residuals contract at the predicted rate") {
    auto s = base_spec(0.5, 0.5, -0.5, 1.0);
    s.gen = model::Generator::scalar(-0.5, s.order, 1.0);
    s.nonlin.f = [](double, double x1, double, double) { return 0.3 * std::sin(x1); };
    s.nonlin.L1 = 0.3;
    const auto rep = solver::picard_solve(s, 128, 1e-13, 200);
    CHECK(rep.converged);
    CHECK(rep.lambda_value < 1.0);
    const auto& r = rep.residual_history;
    REQUIRE(r.size() >= 4);
    for (std::size_t k = 1; k + 1 < r.size(); ++k) {
        if (r[k] < 1e-12) break; // below here roundoff owns the ratios
        CHECK(r[k + 1] < r[k]);
        CHECK(r[k + 1] / r[k] <= rep.lambda_value + 0.1);
    }
}

TEST_CASE("running out of iterations is an answer, not an error") {
    auto s = base_spec(0.5, 0.5, 0.0, 1.0);
    s.nonlin.f = [](double, double x1, double, double) { return 0.9 * std::sin(x1); };
    s.nonlin.L1 = 0.9;
    const auto rep = solver::picard_solve(s, 64, 1e-14, 3);
    CHECK_FALSE(rep.converged);
    CHECK(rep.iterations == 3);
    CHECK(rep.residual_history.size() == 3);
    for (const auto& seg : rep.trajectory.segments)
        for (double w : seg.w) CHECK(std::isfinite(w));

    const auto full = solver::picard_solve(s, 64, 1e-14, 200);
    CHECK(full.converged);
}

TEST_CASE("extra precision does not move a converged solution") {
    auto s = base_spec(0.5, 0.5, 0.0, 1.0);
    s.nonlin.f = [](double, double x1, double, double) { return 0.4 * std::cos(x1); };
    s.nonlin.L1 = 0.4;
    const auto a = solver::picard_solve(s, 64, 1e-10, 200);
    const auto b = solver::picard_solve(s, 64, 1e-13, 200);
    CHECK(a.converged);
    CHECK(b.converged);
    double gap = 0.0;
    const auto& sa = a.trajectory.segments[0];
    const auto& sb = b.trajectory.segments[0];
    for (std::size_t j = 0; j < sa.w.size(); ++j)
        gap = std::max(gap, std::fabs(sa.w[j] - sb.w[j]));
    CHECK(gap <= 1e-10 * 2.0);
}

TEST_CASE("solves are deterministic") {
    auto s = base_spec(0.5, 0.5, -0.5, 1.0);
    s.nonlin.f = [](double, double x1, double, double) { return 0.3 * std::sin(x1); };
    s.nonlin.L1 = 0.3;
    const auto a = solver::picard_solve(s, 64, 1e-12, 100);
    const auto b = solver::picard_solve(s, 64, 1e-12, 100);
    REQUIRE(a.residual_history.size() == b.residual_history.size());
    for (std::size_t j = 0; j < a.trajectory.segments[0].w.size(); ++j)
        CHECK(a.trajectory.segments[0].w[j] == b.trajectory.segments[0].w[j]);
}

TEST_CASE("picard rejects malformed arguments and wide matrices") {
    auto s = base_spec(0.5, 0.5, 0.0, 1.0);
    CHECK_THROWS_AS(solver::picard_solve(s, 1, 1e-10, 50), DomainError);
    CHECK_THROWS_AS(solver::picard_solve(s, 64, 0.0, 50), DomainError);
    CHECK_THROWS_AS(solver::picard_solve(s, 64, 1e-10, 0), DomainError);

    auto sm = base_spec(0.5, 0.5, 0.0, 1.0);
    sm.gen.kind = model::Generator::Kind::matrix;
    sm.gen.matrix = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(solver::picard_solve(sm, 64, 1e-10, 50), DomainError);

    auto si = base_spec(0.5, 0.5, 0.0, 1.0);
    si.mesh.t_times = {0.4};
    si.mesh.s_times = {0.6};
    CHECK_THROWS_AS(solver::picard_solve(si, 64, 1e-10, 50), DomainError);
}

TEST_CASE("a config-built problem solves end to end") {
    const std::string cfg = R"({
        "order": {"alpha": 0.5, "beta": 0.5},
        "mesh": {"T": 1.0},
        "generator": {"kind": "scalar", "lambda": 0.0},
        "u0": 1.0,
        "delta": 1.0,
        "nonlinearity": {"expr": "-0.8*x1", "L": [0.8, 0, 0]}
    })";
    const auto s = model::problem_from_json(cfg);
    const auto rep = solver::picard_solve(s, 256, 1e-12, 200);
    CHECK(rep.converged);
    // Wiring test, not an accuracy test; the discretization error at this grid
    // is just above 1e-3 (see the refinement case above).
    CHECK(linear_sup_err(rep, s, -0.8) < 2e-3);
}
