#include "polytube/ensemble.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace polytube {

Vec intersect_sensor(const MetaTemplate& meta, const Vec& z, const SensorTemplate& sensor,
                     IntersectMode mode) {
    const int l = meta.num_params();
    const int l1 = meta.l1;
    if (z.size() != l) throw DimensionMismatch("intersect_sensor: z size");
    if (sensor.vbar.size() != l1)
        throw PartitionMismatch("intersect_sensor: vbar length must equal the Z1 block");
    Vec zeta = z;
    for (int r = 0; r < l1; ++r)
        zeta[r] = (mode == IntersectMode::Exact) ? std::min(z[r], sensor.vbar[r]) : sensor.vbar[r];
    return zeta;
}

TightenResult tighten_to_cone(const MetaTemplate& meta, const Vec& z) {
    const Mat F = meta.stacked_facets();
    Vec b = meta.stacked_offsets(z);
    VertexEnumeration en;
    try {
        en = enumerate_vertices_detail(F, b);
    } catch (const EmptyPolytope&) {
        throw EmptyEnsemble("tighten_to_cone: empty parameter polytope");
    }
    TightenResult out;
    out.tight.resize(meta.num_params());
    for (int r = 0; r < meta.num_params(); ++r)
        out.tight[r] = (en.vertices * meta.Z.row(r).transpose()).maxCoeff();
    if (meta.cone_feasible(out.tight, 1e-9)) {
        out.zeta = out.tight;
        out.cone_relaxed = false;
        return out;
    }
    // relax upward to the meta cone: min 1'zeta  s.t. H zeta <= 0, zeta >= tight
    const int l = meta.num_params();
    const int nh = meta.num_meta_cone_rows();
    Mat M(nh + l, l);
    M << meta.H, Mat::Identity(l, l);
    Vec lo(nh + l), hi(nh + l);
    lo.head(nh).setConstant(-kInf);
    hi.head(nh).setZero();
    lo.tail(l) = out.tight;
    hi.tail(l).setConstant(kInf);
    auto settings = SolveSettings::geometry();
    settings.eps_abs = settings.eps_rel = 1e-10;
    auto res = solve_lp_dense(Vec::Ones(l), M, lo, hi, settings);
    if (!res.optimal())
        throw EmptyEnsemble("tighten_to_cone: no cone-feasible parameter above the tight one");
    out.zeta = res.x.cwiseMax(out.tight);
    out.cone_relaxed = true;
    return out;
}

std::vector<Vec> propagate_extreme(const MetaTemplate& meta, const Vec& zeta, const Mat& A,
                                   const Mat& B, const std::vector<Vec>& u, const Vec& wbar,
                                   double cone_tol) {
    if (!meta.cone_feasible(zeta, cone_tol))
        throw ConeViolation("propagate_extreme: H zeta > 0");
    const auto& fam = *meta.family;
    if (wbar.size() != fam.num_facets()) throw DimensionMismatch("propagate_extreme: wbar size");
    const size_t nJ = meta.J.size();
    if (!u.empty() && u.size() != nJ)
        throw DimensionMismatch("propagate_extreme: one control per extreme index expected");

    std::vector<Vec> xi(nJ);
    const Mat YA = fam.Y * A;
    const Mat YB = fam.Y * B;
    for (size_t jj = 0; jj < nJ; ++jj) {
        const Vec yj = meta.Omega[meta.J[jj]] * zeta;
        Vec x = Vec::Constant(fam.num_facets(), -std::numeric_limits<double>::infinity());
        for (const auto& L : fam.Lambda) x = x.cwiseMax(YA * (L * yj));
        if (!u.empty()) x += YB * u[jj];
        x += wbar;
        xi[jj] = x;
    }
    return xi;
}

EnsembleStepResult ensemble_step(const MetaTemplate& meta, const Vec& z,
                                 const std::vector<Vec>& u, const SensorTemplate& sensor,
                                 const Mat& A, const Mat& B, const Vec& wbar,
                                 IntersectMode mode) {
    EnsembleStepResult out;
    Vec zeta_raw = intersect_sensor(meta, z, sensor, mode);
    auto tight = tighten_to_cone(meta, zeta_raw);
    out.zeta = tight.zeta;
    out.cone_relaxed = tight.cone_relaxed;
    out.xi = propagate_extreme(meta, out.zeta, A, B, u, wbar, 1e-6);
    out.z_next = Vec::Constant(meta.num_params(), -std::numeric_limits<double>::infinity());
    for (const auto& x : out.xi) out.z_next = out.z_next.cwiseMax(meta.Z * x);
    return out;
}

double intrinsic_deviation(const MetaTemplate& meta, const Vec& z) {
    auto tight = tighten_to_cone(meta, z);
    double dev = 0.0;
    for (int j : meta.J) {
        const Vec yj = meta.Omega[j] * tight.zeta;
        dev = std::max(dev, diameter(VRepPolytope(meta.family->vertex_images(yj))));
    }
    return dev;
}

VRepPolytope extrinsic_hull(const MetaTemplate& meta, const Vec& z) {
    const Mat F = meta.stacked_facets();
    VertexEnumeration en;
    try {
        en = enumerate_vertices_detail(F, meta.stacked_offsets(z));
    } catch (const EmptyPolytope&) {
        throw EmptyEnsemble("extrinsic_hull: empty ensemble");
    }
    const auto& fam = *meta.family;
    std::vector<Vec> pts;
    pts.reserve(en.vertices.rows() * fam.num_vertices());
    for (Eigen::Index v = 0; v < en.vertices.rows(); ++v) {
        const Vec y = en.vertices.row(v).transpose();
        for (const auto& L : fam.Lambda) {
            Vec p = L * y;
            bool dup = false;
            for (const auto& q : pts)
                if ((q - p).cwiseAbs().maxCoeff() < 1e-9) { dup = true; break; }
            if (!dup) pts.push_back(std::move(p));
        }
    }
    Mat V(static_cast<Eigen::Index>(pts.size()), fam.state_dim());
    for (size_t i = 0; i < pts.size(); ++i) V.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    return VRepPolytope(V);
}

VRepPolytope extrinsic_hull_extreme(const MetaTemplate& meta, const Vec& zeta) {
    if (!meta.cone_feasible(zeta, 1e-8))
        throw ConeViolation("extrinsic_hull_extreme: zeta outside the meta cone");
    const auto& fam = *meta.family;
    Mat V(static_cast<Eigen::Index>(meta.J.size()) * fam.num_vertices(), fam.state_dim());
    Eigen::Index r = 0;
    for (int j : meta.J) {
        const Vec yj = meta.Omega[j] * zeta;
        for (const auto& L : fam.Lambda) V.row(r++) = (L * yj).transpose();
    }
    return VRepPolytope(V);
}

MeasureValues measures(const MetaTemplate& meta, const Vec& z) {
    MeasureValues m;
    m.union_hull = extrinsic_hull(meta, z);
    m.extrinsic_diam = diameter(m.union_hull);
    m.intrinsic_dev = intrinsic_deviation(meta, z);
    return m;
}

namespace {

// distinct extreme-polytope parameters of the tightened ensemble
std::vector<Vec> extreme_params(const MetaTemplate& meta, const Vec& zeta, double tol) {
    std::vector<Vec> params;
    for (int j : meta.J) {
        Vec yj = meta.Omega[j] * zeta;
        bool dup = false;
        for (const auto& p : params)
            if ((p - yj).cwiseAbs().maxCoeff() < tol) { dup = true; break; }
        if (!dup) params.push_back(std::move(yj));
    }
    return params;
}

}  // namespace

bool intrinsically_equivalent(const MetaTemplate& meta, const Vec& zA, const Vec& zB, double tol) {
    auto ta = tighten_to_cone(meta, zA);
    auto tb = tighten_to_cone(meta, zB);
    auto pa = extreme_params(meta, ta.zeta, tol);
    auto pb = extreme_params(meta, tb.zeta, tol);
    if (pa.size() != pb.size()) return false;
    // Greedy bijective matching by best translation fit. Translate-equality
    // is transitive, so greedy assignment cannot paint itself into a corner.
    const auto& Y = meta.family->Y;
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(Y);
    std::vector<bool> used(pb.size(), false);
    for (const auto& a : pa) {
        bool matched = false;
        for (size_t j = 0; j < pb.size() && !matched; ++j) {
            if (used[j]) continue;
            const Vec diff = a - pb[j];
            const Vec c = cod.solve(diff);
            if ((diff - Y * c).cwiseAbs().maxCoeff() <= tol) {
                used[j] = true;
                matched = true;
            }
        }
        if (!matched) return false;
    }
    return true;
}

}  // namespace polytube
