#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "case_study.hpp"
#include "oracles.hpp"
#include "polytube/ensemble.hpp"

using namespace polytube;

namespace {

Vec tutorial_prior() {
    Vec z(3);
    z << 6, 3, 3;  // all X contained in [-3, 3]
    return z;
}

std::vector<Vec> const_controls(size_t n, double val, int nu = 1) {
    std::vector<Vec> u(n, Vec::Constant(nu, val));
    return u;
}

}  // namespace

TEST_CASE("tutorial example: deviations 6 and 2") {
    auto meta = fixture::meta_1d();
    const Vec z = tutorial_prior();
    CHECK(intrinsic_deviation(*meta, z) == doctest::Approx(6.0).epsilon(1e-9));

    SensorTemplate sensor{fixture::family_1d()->Y.topRows(0).size() ? Vec() : (Vec(1) << 2.0).finished()};
    Vec zeta = intersect_sensor(*meta, z, sensor, IntersectMode::Exact);
    CHECK(zeta[0] == doctest::Approx(2.0));
    CHECK(intrinsic_deviation(*meta, zeta) == doctest::Approx(2.0).epsilon(1e-9));

    // extrinsic deviation is unchanged by the data-free update
    auto m_prior = measures(*meta, z);
    auto m_post = measures(*meta, zeta);
    CHECK(m_prior.extrinsic_diam == doctest::Approx(6.0).epsilon(1e-9));
    CHECK(m_post.extrinsic_diam == doctest::Approx(6.0).epsilon(1e-9));
    CHECK(m_post.intrinsic_dev <= m_post.extrinsic_diam);
}

TEST_CASE("sensor intersection modes") {
    auto meta = fixture::meta_1d();
    SensorTemplate sensor{(Vec(1) << 2.0).finished()};
    SUBCASE("uninformative measurement leaves z unchanged") {
        Vec z(3);
        z << 1.5, 3, 3;  // z1 <= vbar already
        CHECK((intersect_sensor(*meta, z, sensor, IntersectMode::Exact) - z).norm() == 0.0);
    }
    SUBCASE("exact output feedback clamps to zero width") {
        SensorTemplate exact_sensor{(Vec(1) << 0.0).finished()};
        Vec z = tutorial_prior();
        Vec zeta = intersect_sensor(*meta, z, exact_sensor, IntersectMode::Exact);
        CHECK(zeta[0] == 0.0);
    }
    SUBCASE("relaxed dominates exact componentwise") {
        Vec z = tutorial_prior();
        Vec ze = intersect_sensor(*meta, z, sensor, IntersectMode::Exact);
        Vec zr = intersect_sensor(*meta, z, sensor, IntersectMode::Relaxed);
        CHECK((ze.array() <= zr.array() + 1e-12).all());
    }
    SUBCASE("self-intersection is idempotent") {
        Vec z = tutorial_prior();
        SensorTemplate self{z.head(1)};
        CHECK((intersect_sensor(*meta, z, self, IntersectMode::Exact) - z).norm() == 0.0);
    }
    SUBCASE("wrong partition length") {
        Vec z = tutorial_prior();
        SensorTemplate bad{(Vec(2) << 1, 1).finished()};
        CHECK_THROWS_AS(intersect_sensor(*meta, z, bad, IntersectMode::Exact), PartitionMismatch);
    }
}

TEST_CASE("propagation of extreme polytopes") {
    auto meta = fixture::meta();
    Vec zeta0 = cone_interior_point(meta->H);

    SUBCASE("identity dynamics recover the tight parameters") {
        Mat A = Mat::Identity(2, 2), B = Mat::Zero(2, 1);
        auto xi = propagate_extreme(*meta, zeta0, A, B, {}, Vec::Zero(6));
        for (size_t jj = 0; jj < meta->J.size(); ++jj) {
            const Vec yj = meta->Omega[meta->J[jj]] * zeta0;
            Vec tight = tighten_parameter(meta->family->Y, yj);
            CHECK((xi[jj] - tight).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
    SUBCASE("control shifts translate the propagated parameters exactly") {
        Mat A = fixture::sys_A(), B = fixture::sys_B();
        auto xi0 = propagate_extreme(*meta, zeta0, A, B, const_controls(meta->J.size(), 0.0), fixture::wbar());
        const double delta = 1.7;
        auto xi1 = propagate_extreme(*meta, zeta0, A, B, const_controls(meta->J.size(), delta), fixture::wbar());
        const Vec shift = meta->family->Y * B * Vec::Constant(1, delta);
        for (size_t jj = 0; jj < xi0.size(); ++jj)
            CHECK((xi1[jj] - xi0[jj] - shift).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("cone violation is rejected") {
        Vec bad = zeta0;
        bad[0] += 100.0;
        Mat A = Mat::Identity(2, 2), B = Mat::Zero(2, 1);
        CHECK_THROWS_AS(propagate_extreme(*meta, bad, A, B, {}, Vec::Zero(6)), ConeViolation);
    }
}

TEST_CASE("ensemble step against the brute-force vertex oracle") {
    auto meta = fixture::meta();
    const Vec z0 = fixture::tpl_Z() * fixture::yhat_box();
    SensorTemplate sensor{fixture::vbar()};
    auto step = ensemble_step(*meta, z0, {}, sensor, fixture::sys_A(), fixture::sys_B(), fixture::wbar());

    // oracle: enumerate the parameter polytope at step.zeta, propagate every
    // vertex polytope point-wise, add the disturbance box, re-take supports
    const Mat F = meta->stacked_facets();
    auto en = oracle::enum_vertices_bf(F, meta->stacked_offsets(step.zeta));
    REQUIRE(!en.empty());
    const Mat Y = fixture::tpl_Y();
    Mat Wv(4, 2);
    Wv << 0.5, 0.5, 0.5, -0.5, -0.5, 0.5, -0.5, -0.5;
    Vec zo = Vec::Constant(8, -1e300);
    for (const auto& y : en) {
        auto pv = oracle::enum_vertices_bf(Y, y);
        REQUIRE(!pv.empty());
        Vec xi = Vec::Constant(6, -1e300);
        for (const auto& p : pv)
            for (int w = 0; w < 4; ++w) {
                Vec img = fixture::sys_A() * p + Wv.row(w).transpose();
                xi = xi.cwiseMax(Y * img);
            }
        zo = zo.cwiseMax(fixture::tpl_Z() * xi);
    }
    CHECK((step.z_next - zo).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("static dynamics with blind sensor tighten and stay fixed") {
    auto meta = fixture::meta();
    Vec zeta0 = cone_interior_point(meta->H);
    Vec z = 5.0 * zeta0;  // scaled interior parameter
    SensorTemplate blind{(Vec(1) << kInf).finished()};
    Mat A = Mat::Identity(2, 2), B = Mat::Zero(2, 1);
    auto step = ensemble_step(*meta, z, {}, blind, A, B, Vec::Zero(6));
    CHECK((step.z_next - step.zeta).cwiseAbs().maxCoeff() < 1e-9);
    auto step2 = ensemble_step(*meta, step.z_next, {}, blind, A, B, Vec::Zero(6));
    CHECK((step2.z_next - step.z_next).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("step translation covariance (intrinsic separation at one step)") {
    auto meta = fixture::meta();
    SensorTemplate sensor{fixture::vbar()};
    const Mat A = fixture::sys_A(), B = fixture::sys_B();
    const Vec z0 = fixture::tpl_Z() * fixture::yhat_box();
    const size_t nJ = meta->J.size();

    std::vector<Vec> u0;
    for (size_t j = 0; j < nJ; ++j) u0.push_back((Vec(1) << oracle::runif(-3, 3)).finished());
    const double delta = -2.3;
    std::vector<Vec> u1 = u0;
    for (auto& u : u1) u[0] += delta;

    auto sa = ensemble_step(*meta, z0, u0, sensor, A, B, fixture::wbar());
    auto sb = ensemble_step(*meta, z0, u1, sensor, A, B, fixture::wbar());
    const Vec shift = fixture::tpl_Z() * fixture::tpl_Y() * B * Vec::Constant(1, delta);
    CHECK((sb.z_next - sa.z_next - shift).cwiseAbs().maxCoeff() < 1e-9);
    // intrinsic coordinates (rows with Z Y = 0) unchanged
    CHECK(std::abs(sb.z_next[0] - sa.z_next[0]) < 1e-9);
    CHECK(std::abs(sb.z_next[1] - sa.z_next[1]) < 1e-9);
}

TEST_CASE("intrinsic deviation monotone under intersection") {
    auto meta = fixture::meta_1d();
    for (int t = 0; t < 6; ++t) {
        Vec z(3);
        z << oracle::runif(0.5, 6.0), oracle::runif(1.0, 4.0), oracle::runif(1.0, 4.0);
        SensorTemplate sensor{(Vec(1) << oracle::runif(0.2, 6.0)).finished()};
        Vec zeta = intersect_sensor(*meta, z, sensor, IntersectMode::Exact);
        CHECK(intrinsic_deviation(*meta, zeta) <= intrinsic_deviation(*meta, z) + 1e-9);
    }
}

TEST_CASE("extrinsic hull") {
    auto meta = fixture::meta();
    SUBCASE("all-widths-zero ensemble is a point") {
        Vec z = fixture::tpl_Z() * fixture::tpl_Y() * (Vec(2) << 0.3, -0.4).finished();
        auto hull = extrinsic_hull(*meta, z);
        CHECK(diameter(hull) < 1e-9);
    }
    SUBCASE("hull identity in 64 directions") {
        Vec zeta0 = cone_interior_point(meta->H);
        auto hull = extrinsic_hull(*meta, zeta0);
        auto hullx = extrinsic_hull_extreme(*meta, zeta0);
        for (int k = 0; k < 64; ++k) {
            const double ang = 2.0 * M_PI * k / 64.0;
            Vec d(2);
            d << std::cos(ang), std::sin(ang);
            const double s_brute = (hull.V * d).maxCoeff();
            const double s_extreme = (hullx.V * d).maxCoeff();
            CHECK(std::abs(s_brute - s_extreme) < 1e-8);
        }
    }
    SUBCASE("empty ensemble is a typed error") {
        Vec z(8);
        z << 6, 6, -1, 0, 0, -1, 0, 0;  // forces y1 <= -1, y4 <= -1, impossible in the cone
        CHECK_THROWS_AS(extrinsic_hull(*meta, z), EmptyEnsemble);
    }
}

TEST_CASE("intrinsic equivalence") {
    auto meta = fixture::meta();
    const Vec z0 = fixture::tpl_Z() * fixture::yhat_box();
    SUBCASE("pure translation") {
        Vec a(2);
        a << 1.25, -0.75;
        Vec zb = z0 + fixture::tpl_Z() * fixture::tpl_Y() * a;
        CHECK(intrinsically_equivalent(*meta, z0, zb));
    }
    SUBCASE("tutorial prior and posterior differ") {
        auto meta1 = fixture::meta_1d();
        Vec prior = tutorial_prior();
        Vec post(3);
        post << 2, 3, 3;
        CHECK_FALSE(intrinsically_equivalent(*meta1, prior, post));
    }
    SUBCASE("tight tubes under different control sequences stay equivalent") {
        // The tubes are tight when each step's control acts as a common
        // translation of the posterior, i.e. one input per step. Independent
        // per-extreme inputs give an outer envelope whose shapes may differ.
        SensorTemplate sensor{fixture::vbar()};
        const Mat A = fixture::sys_A(), B = fixture::sys_B();
        Vec za = z0, zb = z0;
        for (int k = 0; k < 3; ++k) {
            auto ua = const_controls(meta->J.size(), oracle::runif(-2, 2));
            auto ub = const_controls(meta->J.size(), oracle::runif(-2, 2));
            za = ensemble_step(*meta, za, ua, sensor, A, B, fixture::wbar()).z_next;
            zb = ensemble_step(*meta, zb, ub, sensor, A, B, fixture::wbar()).z_next;
            CHECK(intrinsically_equivalent(*meta, za, zb));
        }
    }
}
