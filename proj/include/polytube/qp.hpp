#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <string>

#include "polytube/errors.hpp"

namespace polytube {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Magnitude treated as infinity in constraint bounds.
constexpr double kInf = 1e30;

inline bool is_neg_inf(double v) { return v <= -0.5 * kInf; }
inline bool is_pos_inf(double v) { return v >= 0.5 * kInf; }

/**
 * Convex quadratic program in box-constrained standard form,
 *
 *    min  1/2 x'Px + q'x   s.t.  lo <= Mx <= hi,
 *
 * with P symmetric positive semidefinite and sparse M. Equality rows are
 * encoded as lo == hi, one-sided rows carry +-kInf on the open side.
 */
struct QuadraticProgram {
    SpMat P;
    Vec q;
    SpMat M;
    Vec lo;
    Vec hi;

    Eigen::Index num_vars() const { return q.size(); }
    Eigen::Index num_rows() const { return lo.size(); }
    void validate() const;
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIter };

std::string to_string(SolveStatus s);

struct SolveResult {
    Vec x;             ///< primal solution (best iterate on MaxIter)
    Vec y;             ///< row multipliers; y < 0 marks an active lower bound, y > 0 an upper one
    SolveStatus status = SolveStatus::MaxIter;
    double primal_res = 0.0;
    double dual_res = 0.0;
    double objective = 0.0;
    int iterations = 0;
    bool polished = false;
    Vec certificate;   ///< infeasibility certificate when status is *Infeasible

    bool optimal() const { return status == SolveStatus::Optimal; }
};

struct SolveSettings {
    double eps_abs = 1e-8;
    double eps_rel = 1e-8;
    double eps_pinf = 1e-7;
    double eps_dinf = 1e-7;
    int max_iter = 200000;
    double sigma = 1e-6;
    double alpha = 1.6;
    double rho = 0.1;
    bool adaptive_rho = true;
    int max_rho_updates = 12;
    bool scaling = true;
    int scaling_iters = 10;
    int check_interval = 25;
    bool polish = true;
    double polish_delta = 1e-8;
    int polish_refine_steps = 4;

    /// Defaults for geometric subroutines (support functions, interior points).
    static SolveSettings geometry() { return SolveSettings{}; }

    /// Defaults for the receding-horizon QPs.
    static SolveSettings mpc() {
        SolveSettings s;
        s.eps_abs = 1e-6;
        s.eps_rel = 1e-6;
        return s;
    }
};

/**
 * Operator-splitting (ADMM) solver with Ruiz equilibration, a cached
 * quasi-definite normal-equation factorization, optional solution polishing
 * and primal/dual infeasibility certificates.
 *
 * A solver instance owns a workspace that persists across solves: bounds and
 * the linear cost may be updated in place and the previous solution is reused
 * as a warm start, which is the intended mode for receding-horizon loops.
 * Instances are single-threaded; concurrent runs need separate instances.
 */
class QpSolver {
public:
    explicit QpSolver(QuadraticProgram qp, SolveSettings settings = SolveSettings{});
    ~QpSolver();
    QpSolver(QpSolver&&) noexcept;
    QpSolver& operator=(QpSolver&&) noexcept;
    QpSolver(const QpSolver&) = delete;
    QpSolver& operator=(const QpSolver&) = delete;

    /// Replaces lo/hi without touching the factorization.
    void update_bounds(const Vec& lo, const Vec& hi);
    /// Replaces the linear cost term.
    void update_lin_cost(const Vec& q);
    /// Seeds the next solve with an unscaled primal/dual pair.
    void warm_start(const Vec& x, const Vec& y);
    /// Clears the iterate so the next solve starts cold.
    void cold_start();

    SolveResult solve();

    const QuadraticProgram& problem() const;
    const SolveSettings& settings() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper.
SolveResult solve_qp(const QuadraticProgram& qp, SolveSettings settings = SolveSettings{});

/// Linear program min c'x s.t. lo <= Mx <= hi (P = 0 specialization).
SolveResult solve_lp(const Vec& c, const SpMat& M, const Vec& lo, const Vec& hi,
                     SolveSettings settings = SolveSettings::geometry());

/// Dense helper for small geometric subproblems.
SolveResult solve_lp_dense(const Vec& c, const Mat& M, const Vec& lo, const Vec& hi,
                           SolveSettings settings = SolveSettings::geometry());

}  // namespace polytube
