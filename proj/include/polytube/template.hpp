#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "polytube/polytope.hpp"

namespace polytube {

/**
 * Configuration-constrained template family. P(y) = {x : Yx <= y} has the
 * joint facet/vertex parameterization P(y) = conv{Lambda_i y} on the cone
 * {y : Gy <= 0}.
 */
struct TemplateFamily {
    Mat Y;                    ///< m x n facet normals
    Mat G;                    ///< n_G x m configuration cone (zero rows allowed)
    std::vector<Mat> Lambda;  ///< vertex maps, each n x m

    int state_dim() const { return static_cast<int>(Y.cols()); }
    int num_facets() const { return static_cast<int>(Y.rows()); }
    int num_cone_rows() const { return static_cast<int>(G.rows()); }
    int num_vertices() const { return static_cast<int>(Lambda.size()); }

    bool cone_feasible(const Vec& y, double tol = 1e-8) const {
        return G.rows() == 0 || ((G * y).array() <= tol).all();
    }
    /// Vertex images {Lambda_i y}, one per row (valid for cone-feasible y).
    Mat vertex_images(const Vec& y) const;
};

/// A parameter y denoting P(y) within a family.
struct TemplatePolytope {
    std::shared_ptr<const TemplateFamily> family;
    Vec y;
    bool configured = false;
};

/**
 * Meta template over facet-parameter space: the ensemble parameter polytope
 * PP(zeta) = {y : Gy <= 0, Zy <= zeta} has vertices {Omega_j zeta} on the
 * cone {zeta : H zeta <= 0}. J indexes the extreme vertex polytopes.
 */
struct MetaTemplate {
    std::shared_ptr<const TemplateFamily> family;
    Mat Z;                   ///< l x m
    Mat H;                   ///< n_H x l
    int l1 = 0;              ///< leading rows of Z forming the sensor block Z1
    std::vector<Mat> Omega;  ///< meta vertex maps, each m x l
    std::vector<int> J;      ///< extreme vertex indices, ascending, 0-based

    int num_params() const { return static_cast<int>(Z.rows()); }
    int num_meta_cone_rows() const { return static_cast<int>(H.rows()); }
    int num_meta_vertices() const { return static_cast<int>(Omega.size()); }

    bool cone_feasible(const Vec& zeta, double tol = 1e-8) const {
        return ((H * zeta).array() <= tol).all();
    }
    /// Stacked facet matrix (G; Z) of PP in y-space.
    Mat stacked_facets() const;
    /// Stacked offsets (0; zeta).
    Vec stacked_offsets(const Vec& zeta) const;
    /// Vertex images {Omega_j zeta}, one per row.
    Mat vertex_images(const Vec& zeta) const;
};

/// Sensor ensemble parameters: all sets representable as subsets of some
/// P(y) with Z1 y <= vbar. Requires Z1 Y = 0 for translation invariance.
struct SensorTemplate {
    Vec vbar;
};

struct ConsistencyItem {
    std::string name;
    double residual = 0.0;
    bool pass = false;
};

struct ConsistencyReport {
    std::vector<ConsistencyItem> items;
    double tol = 1e-12;
    bool all_pass() const;
    std::string summary() const;
};

/// Max-slack interior point of {C t <= 0} with an infinity-norm box cap.
/// Returns the point; writes the achieved slack when requested.
Vec cone_interior_point(const Mat& C, double* slack = nullptr);

/**
 * Synthesizes vertex maps for the parametric polytope
 * {x : F0 x <= 0, Fp x <= theta} over the cone {theta : C theta <= 0}.
 * Picks a max-slack interior theta, enumerates vertices, and assembles each
 * map from the active rows (least-squares pseudo-inverse when a vertex is
 * over-determined). Returns maps in canonical (lexicographic vertex) order.
 */
std::vector<Mat> synthesize_vertex_maps(const Mat& F0, const Mat& Fp, const Mat& C);

/// Base-level synthesis: Lambda maps for (Y, G).
TemplateFamily make_family(Mat Y, Mat G);

/// Meta-level synthesis: Omega maps and the extreme index set J for (Z, H)
/// over an existing family.
MetaTemplate make_meta(std::shared_ptr<const TemplateFamily> family, Mat Z, Mat H, int l1);

/**
 * Extreme vertex polytope indices at parameter zeta: j is kept iff P(Omega_j
 * zeta) contains another vertex polytope P(Omega_k zeta), i.e. the vertex is
 * not inclusion-minimal in the vertex-polytope order. The set is independent
 * of the choice of strictly interior zeta.
 */
std::vector<int> extract_extreme_indices(const MetaTemplate& meta, const Vec& zeta,
                                         double tol = 1e-7);

/// Algebraic-geometric consistency checks for a family/meta pair. The meta
/// identities are evaluated modulo the row span of G, which is the form they
/// take when the parameter polytope carries explicit cone rows.
ConsistencyReport validate_consistency(const TemplateFamily& fam, const MetaTemplate& meta,
                                       double tol = 1e-12);

}  // namespace polytube
