#pragma once

#include <vector>

#include "polytube/qp.hpp"

namespace polytube {

/// Convex hull of a finite point list; one point per row. Zero rows denote
/// the empty set. Used as the oracle-side set representation.
struct VRepPolytope {
    Mat V;

    VRepPolytope() : V(0, 0) {}
    explicit VRepPolytope(Mat pts) : V(std::move(pts)) {}

    bool empty() const { return V.rows() == 0; }
    Eigen::Index num_points() const { return V.rows(); }
    Eigen::Index dim() const { return V.cols(); }
    Vec point(Eigen::Index i) const { return V.row(i).transpose(); }

    VRepPolytope translated(const Vec& a) const {
        Mat W = V;
        W.rowwise() += a.transpose();
        return VRepPolytope(W);
    }
};

struct PolytopeTols {
    double feasibility = 1e-8;  ///< absolute tolerance on facet residuals
    double dedup = 1e-7;        ///< vertex deduplication tolerance
};

/// max_{Yx <= y} d'x via LP. Throws EmptyPolytope / UnboundedPolytope.
double support(const Mat& Y, const Vec& y, const Vec& d);

/// Support evaluated over the configured vertex set {Lambda_i y}.
double support_configured(const std::vector<Mat>& Lambda, const Vec& y, const Vec& d);

/// true iff every point of inner satisfies Y v <= y + tol.
bool contains_polytope(const Mat& Y, const Vec& y, const VRepPolytope& inner,
                       double tol = PolytopeTols{}.feasibility);

/// Euclidean distance from p to conv(X). Zero for interior points.
double point_distance(const VRepPolytope& X, const Vec& p);

/// Hausdorff distance between two nonempty V-rep polytopes (Euclidean norm),
/// evaluated as a max of per-vertex projection QPs.
double hausdorff(const VRepPolytope& X, const VRepPolytope& Y);

/// Volume-normalized centroid. Degenerate inputs are handled through their
/// affine hull (supported up to affine dimension 2).
Vec centroid(const VRepPolytope& X);

/// max_{x,y in X} ||x - y||; attained at vertices.
double diameter(const VRepPolytope& X);

struct VertexEnumeration {
    Mat vertices;                              ///< one vertex per row, lexicographic order
    std::vector<std::vector<int>> active_sets; ///< full active row sets per vertex
};

/// Brute-force vertex enumeration of {x : F x <= b} over active row subsets.
/// Throws EmptyPolytope / UnboundedPolytope when no vertex exists.
VertexEnumeration enumerate_vertices_detail(const Mat& F, const Vec& b,
                                            PolytopeTols tols = PolytopeTols{});

VRepPolytope enumerate_vertices(const Mat& Y, const Vec& y, PolytopeTols tols = PolytopeTols{});

/// Componentwise-minimal parameter with an unchanged set: t_r = support in
/// row direction r. Requires a bounded nonempty polytope.
Vec tighten_parameter(const Mat& Y, const Vec& y, PolytopeTols tols = PolytopeTols{});

}  // namespace polytube
