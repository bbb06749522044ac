#include "polytube/polytope.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace polytube {

namespace {

bool lex_less(const Vec& a, const Vec& b, double tol = 1e-9) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i] - tol) return true;
        if (a[i] > b[i] + tol) return false;
    }
    return false;
}

// all k-subsets of {0..n-1}, lexicographic
void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
    if (k > n || k <= 0) return;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

double support(const Mat& Y, const Vec& y, const Vec& d) {
    if (Y.cols() != d.size() || Y.rows() != y.size())
        throw DimensionMismatch("support: dimensions disagree");
    Vec lo = Vec::Constant(y.size(), -kInf);
    auto res = solve_lp_dense(-d, Y, lo, y);
    if (res.status == SolveStatus::PrimalInfeasible)
        throw EmptyPolytope("support: P(y) is empty");
    if (res.status == SolveStatus::DualInfeasible)
        throw UnboundedPolytope("support: unbounded in direction");
    if (!res.optimal())
        throw NumericalBreakdown("support: LP did not converge");
    return -res.objective;
}

double support_configured(const std::vector<Mat>& Lambda, const Vec& y, const Vec& d) {
    if (Lambda.empty()) throw EmptyPolytope("support_configured: no vertex maps");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& L : Lambda) best = std::max(best, d.dot(L * y));
    return best;
}

bool contains_polytope(const Mat& Y, const Vec& y, const VRepPolytope& inner, double tol) {
    if (inner.empty()) return true;
    if (Y.cols() != inner.dim()) throw DimensionMismatch("contains_polytope: ambient dimensions disagree");
    Mat R = Y * inner.V.transpose();  // m x k
    for (Eigen::Index r = 0; r < R.rows(); ++r)
        for (Eigen::Index c = 0; c < R.cols(); ++c)
            if (R(r, c) > y[r] + tol) return false;
    return true;
}

double point_distance(const VRepPolytope& X, const Vec& p) {
    if (X.empty()) throw EmptyPolytope("point_distance: empty set");
    const Eigen::Index k = X.num_points();
    if (k == 1) return (X.point(0) - p).norm();
    // min ||V' l - p||^2 over the simplex
    Mat P = X.V * X.V.transpose();
    P += 1e-12 * Mat::Identity(k, k);
    Vec q = -X.V * p;
    Mat M(k + 1, k);
    M.setZero();
    M.topLeftCorner(k, k).setIdentity();
    M.row(k).setOnes();
    Vec lo(k + 1), hi(k + 1);
    lo.head(k).setZero();
    hi.head(k).setConstant(kInf);
    lo[k] = 1.0;
    hi[k] = 1.0;
    QuadraticProgram qp;
    qp.P = P.sparseView();
    qp.q = q;
    qp.M = M.sparseView();
    qp.lo = lo;
    qp.hi = hi;
    auto settings = SolveSettings::geometry();
    settings.eps_abs = settings.eps_rel = 1e-10;
    auto res = solve_qp(qp, settings);
    if (!res.optimal()) throw NumericalBreakdown("point_distance: projection QP failed");
    // evaluate at the projected simplex point; avoids objective cancellation
    Vec lam = res.x.cwiseMax(0.0);
    const double s = lam.sum();
    if (s > 0) lam /= s;
    Vec w = X.V.transpose() * lam;
    return (w - p).norm();
}

double hausdorff(const VRepPolytope& X, const VRepPolytope& Y) {
    if (X.empty() || Y.empty()) throw EmptyPolytope("hausdorff: empty operand");
    if (X.dim() != Y.dim()) throw DimensionMismatch("hausdorff: dimensions disagree");
    double d = 0.0;
    for (Eigen::Index i = 0; i < X.num_points(); ++i)
        d = std::max(d, point_distance(Y, X.point(i)));
    for (Eigen::Index i = 0; i < Y.num_points(); ++i)
        d = std::max(d, point_distance(X, Y.point(i)));
    return d;
}

namespace {

// 2-D convex hull, counterclockwise (Andrew monotone chain).
std::vector<Eigen::Index> hull2d(const Mat& P) {
    const Eigen::Index n = P.rows();
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (P(a, 0) != P(b, 0)) return P(a, 0) < P(b, 0);
        return P(a, 1) < P(b, 1);
    });
    auto cross = [&](Eigen::Index o, Eigen::Index a, Eigen::Index b) {
        return (P(a, 0) - P(o, 0)) * (P(b, 1) - P(o, 1)) -
               (P(a, 1) - P(o, 1)) * (P(b, 0) - P(o, 0));
    };
    std::vector<Eigen::Index> h(2 * n);
    int k = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], idx[i]) <= 0) --k;
        h[k++] = idx[i];
    }
    const int lower = k + 1;
    for (Eigen::Index i = n - 2; i >= 0; --i) {
        while (k >= lower && cross(h[k - 2], h[k - 1], idx[i]) <= 0) --k;
        h[k++] = idx[i];
    }
    h.resize(k - 1);
    return h;
}

}  // namespace

Vec centroid(const VRepPolytope& X) {
    if (X.empty()) throw EmptyPolytope("centroid: empty set");
    const Eigen::Index n = X.dim();
    const Eigen::Index k = X.num_points();
    Vec mean = X.V.colwise().mean().transpose();
    Mat C = X.V.rowwise() - mean.transpose();
    Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeThinV);
    const double scale = std::max(1.0, svd.singularValues().size() ? svd.singularValues()[0] : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-9 * scale) ++rank;
    if (rank == 0) return mean;
    if (rank == 1) {
        Vec u = svd.matrixV().col(0);
        Vec t = C * u;
        return mean + 0.5 * (t.minCoeff() + t.maxCoeff()) * u;
    }
    if (rank == 2) {
        Mat U = svd.matrixV().leftCols(2);  // n x 2
        Mat P2 = C * U;                     // k x 2
        auto h = hull2d(P2);
        // fan triangulation from the first hull vertex
        double area2 = 0.0;
        Eigen::Vector2d acc(0, 0);
        const Eigen::Vector2d p0 = P2.row(h[0]).transpose();
        for (size_t i = 1; i + 1 < h.size(); ++i) {
            const Eigen::Vector2d a = P2.row(h[i]).transpose();
            const Eigen::Vector2d b = P2.row(h[i + 1]).transpose();
            const double cr = (a - p0).x() * (b - p0).y() - (a - p0).y() * (b - p0).x();
            area2 += cr;
            acc += cr * (p0 + a + b) / 3.0;
        }
        if (std::abs(area2) < 1e-14) {  // numerically flat
            Vec u = svd.matrixV().col(0);
            Vec t = C * u;
            return mean + 0.5 * (t.minCoeff() + t.maxCoeff()) * u;
        }
        Eigen::Vector2d c2 = acc / area2;
        return mean + U * c2;
    }
    (void)n; (void)k;
    throw Error("centroid: affine dimension > 2 is not supported");
}

double diameter(const VRepPolytope& X) {
    if (X.empty()) throw EmptyPolytope("diameter: empty set");
    double d = 0.0;
    for (Eigen::Index i = 0; i < X.num_points(); ++i)
        for (Eigen::Index j = i + 1; j < X.num_points(); ++j)
            d = std::max(d, (X.point(i) - X.point(j)).norm());
    return d;
}

VertexEnumeration enumerate_vertices_detail(const Mat& F, const Vec& b, PolytopeTols tols) {
    if (F.rows() != b.size()) throw DimensionMismatch("enumerate_vertices: F/b disagree");
    const int m = static_cast<int>(F.rows());
    const int n = static_cast<int>(F.cols());
    std::vector<Vec> verts;
    std::vector<std::vector<int>> active;

    for_each_subset(m, n, [&](const std::vector<int>& S) {
        Mat FS(n, n);
        Vec bS(n);
        for (int r = 0; r < n; ++r) {
            FS.row(r) = F.row(S[r]);
            bS[r] = b[S[r]];
        }
        Eigen::PartialPivLU<Mat> lu(FS);
        const double det = std::abs(lu.determinant());
        if (det < 1e-10) return;
        Vec x = lu.solve(bS);
        Vec resid = F * x - b;
        for (int r = 0; r < m; ++r) {
            if (resid[r] > tols.feasibility * (1.0 + std::abs(b[r]))) return;
        }
        for (const auto& v : verts)
            if ((v - x).cwiseAbs().maxCoeff() < tols.dedup) return;
        std::vector<int> act;
        for (int r = 0; r < m; ++r)
            if (std::abs(resid[r]) <= tols.dedup * (1.0 + std::abs(b[r]))) act.push_back(r);
        verts.push_back(std::move(x));
        active.push_back(std::move(act));
    });

    if (verts.empty()) {
        Vec lo = Vec::Constant(m, -kInf);
        auto feas = solve_lp_dense(Vec::Zero(n), F, lo, b);
        if (feas.status == SolveStatus::PrimalInfeasible)
            throw EmptyPolytope("enumerate_vertices: empty polytope");
        throw UnboundedPolytope("enumerate_vertices: no vertices (unbounded or degenerate)");
    }

    std::vector<size_t> order(verts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t bb) { return lex_less(verts[a], verts[bb]); });

    VertexEnumeration out;
    out.vertices.resize(static_cast<Eigen::Index>(verts.size()), n);
    out.active_sets.resize(verts.size());
    for (size_t i = 0; i < order.size(); ++i) {
        out.vertices.row(static_cast<Eigen::Index>(i)) = verts[order[i]].transpose();
        out.active_sets[i] = active[order[i]];
    }
    return out;
}

VRepPolytope enumerate_vertices(const Mat& Y, const Vec& y, PolytopeTols tols) {
    return VRepPolytope(enumerate_vertices_detail(Y, y, tols).vertices);
}

Vec tighten_parameter(const Mat& Y, const Vec& y, PolytopeTols tols) {
    auto en = enumerate_vertices(Y, y, tols);
    Vec t(Y.rows());
    for (Eigen::Index r = 0; r < Y.rows(); ++r)
        t[r] = (en.V * Y.row(r).transpose()).maxCoeff();
    return t;
}

}  // namespace polytube
