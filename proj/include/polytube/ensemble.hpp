#pragma once

#include <memory>
#include <vector>

#include "polytube/template.hpp"

namespace polytube {

/// Parameter z denoting the information ensemble of all compact sets covered
/// by some P(y) with Gy <= 0, Zy <= z.
struct EnsembleParam {
    std::shared_ptr<const MetaTemplate> meta;
    Vec z;
};

enum class IntersectMode { Exact, Relaxed };

/// Meta-level sensor intersection. Exact mode: zeta1 = min(z1, vbar),
/// zeta2 = z2 (parameter of the true posterior). Relaxed mode: the
/// componentwise-least zeta with (vbar; z2) <= zeta, the convex relaxation
/// used inside the dual QP.
Vec intersect_sensor(const MetaTemplate& meta, const Vec& z, const SensorTemplate& sensor,
                     IntersectMode mode);

struct TightenResult {
    Vec zeta;           ///< cone-feasible parameter
    Vec tight;          ///< support-tightened parameter (minimal, may sit outside the cone)
    bool cone_relaxed = false;  ///< true when zeta had to grow to reach the cone
};

/// Support-tightens z over its parameter polytope; if the tight parameter
/// leaves the meta cone, relaxes it to a componentwise-minimal cone point
/// (sum-minimal LP above the tight values). Throws EmptyEnsemble.
TightenResult tighten_to_cone(const MetaTemplate& meta, const Vec& z);

/// Minimal propagated parameters for the extreme vertex polytopes:
/// xi_j[r] = max_i (Y A Lambda_i Omega_j zeta)[r] + (Y B u_j)[r] + wbar[r].
/// Requires H zeta <= tol and one control per extreme index.
std::vector<Vec> propagate_extreme(const MetaTemplate& meta, const Vec& zeta, const Mat& A,
                                   const Mat& B, const std::vector<Vec>& u, const Vec& wbar,
                                   double cone_tol = 1e-8);

struct EnsembleStepResult {
    Vec z_next;
    Vec zeta;            ///< intersected, cone-feasible parameter actually propagated
    bool cone_relaxed = false;
    std::vector<Vec> xi; ///< per-extreme propagated parameters
};

/// One meta-learning step: sensor intersection, cone tightening, extreme
/// propagation, and the componentwise envelope z+ = max_j Z xi_j.
/// Controls may be empty (treated as zero input on every extreme polytope).
EnsembleStepResult ensemble_step(const MetaTemplate& meta, const Vec& z,
                                 const std::vector<Vec>& u, const SensorTemplate& sensor,
                                 const Mat& A, const Mat& B, const Vec& wbar,
                                 IntersectMode mode = IntersectMode::Exact);

/// Largest extreme-polytope diameter (the polytopic intrinsic deviation).
double intrinsic_deviation(const MetaTemplate& meta, const Vec& z);

/// Union of all ensemble members as a V-rep point cloud: vertex images of
/// every vertex of the parameter polytope. Exact for any nonempty z.
VRepPolytope extrinsic_hull(const MetaTemplate& meta, const Vec& z);

/// Hull via extreme vertex polytopes only (valid for cone-feasible zeta).
VRepPolytope extrinsic_hull_extreme(const MetaTemplate& meta, const Vec& zeta);

struct MeasureValues {
    double intrinsic_dev = 0.0;
    double extrinsic_diam = 0.0;
    VRepPolytope union_hull;
};

MeasureValues measures(const MetaTemplate& meta, const Vec& z);

/// Shape-coordinate equality of two ensembles: extreme polytopes match up to
/// per-set translations after canonical signature matching.
bool intrinsically_equivalent(const MetaTemplate& meta, const Vec& zA, const Vec& zB,
                              double tol = 1e-7);

}  // namespace polytube
