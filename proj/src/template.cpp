#include "polytube/template.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace polytube {

Mat TemplateFamily::vertex_images(const Vec& y) const {
    Mat V(static_cast<Eigen::Index>(Lambda.size()), state_dim());
    for (size_t i = 0; i < Lambda.size(); ++i) V.row(static_cast<Eigen::Index>(i)) = (Lambda[i] * y).transpose();
    return V;
}

Mat MetaTemplate::stacked_facets() const {
    Mat F(family->G.rows() + Z.rows(), Z.cols());
    F << family->G, Z;
    return F;
}

Vec MetaTemplate::stacked_offsets(const Vec& zeta) const {
    Vec b(family->G.rows() + Z.rows());
    b.head(family->G.rows()).setZero();
    b.tail(Z.rows()) = zeta;
    return b;
}

Mat MetaTemplate::vertex_images(const Vec& zeta) const {
    Mat V(static_cast<Eigen::Index>(Omega.size()), Z.cols());
    for (size_t j = 0; j < Omega.size(); ++j) V.row(static_cast<Eigen::Index>(j)) = (Omega[j] * zeta).transpose();
    return V;
}

bool ConsistencyReport::all_pass() const {
    for (const auto& it : items)
        if (!it.pass) return false;
    return true;
}

std::string ConsistencyReport::summary() const {
    std::ostringstream os;
    for (const auto& it : items)
        os << (it.pass ? "pass" : "FAIL") << "  " << it.name << "  residual=" << it.residual << "\n";
    return os.str();
}

Vec cone_interior_point(const Mat& C, double* slack) {
    const Eigen::Index k = C.cols();
    if (C.rows() == 0) {
        if (slack) *slack = 1.0;
        return Vec::Ones(k);
    }
    // variables (theta, t): max t  s.t.  C theta + t 1 <= 0, -1 <= theta <= 1
    const Eigen::Index nc = C.rows();
    Mat M(nc + k, k + 1);
    M.setZero();
    M.topLeftCorner(nc, k) = C;
    M.topRightCorner(nc, 1).setOnes();
    M.bottomLeftCorner(k, k).setIdentity();
    Vec lo(nc + k), hi(nc + k);
    lo.head(nc).setConstant(-kInf);
    hi.head(nc).setZero();
    lo.tail(k).setConstant(-1.0);
    hi.tail(k).setConstant(1.0);
    Vec c = Vec::Zero(k + 1);
    c[k] = -1.0;
    auto res = solve_lp_dense(c, M, lo, hi);
    if (!res.optimal() || res.x[k] <= 1e-9)
        throw NoInteriorPoint("cone_interior_point: cone has no strict interior");
    if (slack) *slack = res.x[k];
    return res.x.head(k);
}

std::vector<Mat> synthesize_vertex_maps(const Mat& F0, const Mat& Fp, const Mat& C) {
    const Eigen::Index n = Fp.cols();
    const Eigen::Index k0 = F0.rows();
    const Eigen::Index kp = Fp.rows();
    if (F0.rows() > 0 && F0.cols() != n)
        throw DimensionMismatch("synthesize_vertex_maps: F0/Fp column mismatch");
    if (C.rows() > 0 && C.cols() != kp)
        throw DimensionMismatch("synthesize_vertex_maps: cone width mismatch");

    Vec theta = cone_interior_point(C);
    Mat F(k0 + kp, n);
    if (k0 > 0) F << F0, Fp; else F = Fp;
    Vec b(k0 + kp);
    b.head(k0).setZero();
    b.tail(kp) = theta;

    auto en = enumerate_vertices_detail(F, b);
    std::vector<Mat> maps;
    maps.reserve(en.active_sets.size());
    for (size_t v = 0; v < en.active_sets.size(); ++v) {
        const auto& act = en.active_sets[v];
        Mat Ma(static_cast<Eigen::Index>(act.size()), n);
        Mat Sa = Mat::Zero(static_cast<Eigen::Index>(act.size()), kp);
        for (size_t r = 0; r < act.size(); ++r) {
            Ma.row(static_cast<Eigen::Index>(r)) = F.row(act[r]);
            if (act[r] >= k0) Sa(static_cast<Eigen::Index>(r), act[r] - k0) = 1.0;
        }
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(Ma);
        if (cod.rank() < n)
            throw DegenerateVertex("synthesize_vertex_maps: active-set rank below dimension");
        Mat map = cod.pseudoInverse() * Sa;  // n x kp
        Vec check = map * theta;
        if ((check - en.vertices.row(static_cast<Eigen::Index>(v)).transpose()).cwiseAbs().maxCoeff() > 1e-7)
            throw DegenerateVertex("synthesize_vertex_maps: inconsistent over-determined vertex");
        maps.push_back(std::move(map));
    }
    return maps;
}

TemplateFamily make_family(Mat Y, Mat G) {
    if (G.rows() > 0 && G.cols() != Y.rows())
        throw DimensionMismatch("make_family: G columns must match facet count");
    TemplateFamily fam;
    fam.Lambda = synthesize_vertex_maps(Mat(0, Y.cols()), Y, G);
    fam.Y = std::move(Y);
    fam.G = std::move(G);
    // Lambda_i Y = I must hold exactly for a valid family
    for (const auto& L : fam.Lambda) {
        Mat R = L * fam.Y - Mat::Identity(fam.state_dim(), fam.state_dim());
        if (R.cwiseAbs().maxCoeff() > 1e-9)
            throw DegenerateVertex("make_family: vertex map fails Lambda Y = I");
    }
    return fam;
}

std::vector<int> extract_extreme_indices(const MetaTemplate& meta, const Vec& zeta, double tol) {
    if (!meta.cone_feasible(zeta, 1e-9))
        throw ConeViolation("extract_extreme_indices: zeta outside the meta cone");
    const Mat V = meta.vertex_images(zeta);
    const int nv = static_cast<int>(V.rows());
    std::vector<int> J;
    for (int j = 0; j < nv; ++j) {
        const double s = tol * (1.0 + V.row(j).cwiseAbs().maxCoeff());
        bool contains_other = false;
        for (int k = 0; k < nv && !contains_other; ++k) {
            if (k == j) continue;
            if (((V.row(k) - V.row(j)).array() <= s).all() &&
                (V.row(k) - V.row(j)).cwiseAbs().maxCoeff() > s)
                contains_other = true;
        }
        if (contains_other) J.push_back(j);
    }
    return J;
}

MetaTemplate make_meta(std::shared_ptr<const TemplateFamily> family, Mat Z, Mat H, int l1) {
    if (!family) throw TemplateMismatch("make_meta: null family");
    if (Z.cols() != family->num_facets())
        throw DimensionMismatch("make_meta: Z columns must match facet count");
    if (H.cols() != Z.rows())
        throw DimensionMismatch("make_meta: H columns must match Z rows");
    if (l1 < 0 || l1 > Z.rows())
        throw PartitionMismatch("make_meta: invalid sensor block size");
    MetaTemplate meta;
    meta.family = std::move(family);
    meta.Omega = synthesize_vertex_maps(meta.family->G, Z, H);
    meta.Z = std::move(Z);
    meta.H = std::move(H);
    meta.l1 = l1;
    Vec zeta0 = cone_interior_point(meta.H);
    meta.J = extract_extreme_indices(meta, zeta0);
    return meta;
}

namespace {

// max-abs residual of the least-squares fit rows(X) ~ rowspan(G)
double rowspan_residual(const Mat& X, const Mat& G) {
    if (G.rows() == 0) return X.cwiseAbs().maxCoeff();
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(G.transpose());
    Mat K = cod.solve(X.transpose());  // G' K ~ X'
    return (X.transpose() - G.transpose() * K).cwiseAbs().maxCoeff();
}

}  // namespace

ConsistencyReport validate_consistency(const TemplateFamily& fam, const MetaTemplate& meta,
                                       double tol) {
    if (meta.Z.cols() != fam.num_facets() || (meta.H.rows() > 0 && meta.H.cols() != meta.num_params()))
        throw DimensionMismatch("validate_consistency: dimensions disagree");
    ConsistencyReport rep;
    rep.tol = tol;
    auto add = [&](const std::string& name, double resid) {
        rep.items.push_back({name, resid, resid <= tol});
    };

    add("G Y = 0", fam.G.rows() ? (fam.G * fam.Y).cwiseAbs().maxCoeff() : 0.0);

    double lam_res = 0.0;
    const Mat I = Mat::Identity(fam.state_dim(), fam.state_dim());
    for (const auto& L : fam.Lambda) lam_res = std::max(lam_res, (L * fam.Y - I).cwiseAbs().maxCoeff());
    add("Lambda_i Y = I", lam_res);

    if (meta.l1 > 0)
        add("Z1 Y = 0", (meta.Z.topRows(meta.l1) * fam.Y).cwiseAbs().maxCoeff());

    add("H Z = 0 (mod G)", rowspan_residual(meta.H * meta.Z, fam.G));

    double om_res = 0.0;
    const Mat Im = Mat::Identity(fam.num_facets(), fam.num_facets());
    for (const auto& Om : meta.Omega)
        om_res = std::max(om_res, rowspan_residual(Om * meta.Z - Im, fam.G));
    add("Omega_j Z = I (mod G)", om_res);

    return rep;
}

}  // namespace polytube
