#include "polytube/qp.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

namespace polytube {

namespace {

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Column-wise infinity norms of a sparse matrix.
Vec col_inf_norms(const SpMat& A, Eigen::Index n) {
    Vec out = Vec::Zero(n);
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
            out[it.col()] = std::max(out[it.col()], std::abs(it.value()));
    return out;
}

Vec row_inf_norms(const SpMat& A, Eigen::Index m) {
    Vec out = Vec::Zero(m);
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
            out[it.row()] = std::max(out[it.row()], std::abs(it.value()));
    return out;
}

void scale_rows_inplace(SpMat& A, const Vec& d) {
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
            it.valueRef() *= d[it.row()];
}

void scale_cols_inplace(SpMat& A, const Vec& d) {
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
            it.valueRef() *= d[it.col()];
}

constexpr double kRhoEq = 1e3;     // multiplier on rho for equality rows
constexpr double kRhoLoose = 1e-6; // multiplier for rows with no finite bound
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;

}  // namespace

void QuadraticProgram::validate() const {
    const auto n = num_vars();
    const auto m = num_rows();
    if (P.rows() != n || P.cols() != n)
        throw DimensionMismatch("QuadraticProgram: P must be n-by-n");
    if (M.rows() != m || M.cols() != n)
        throw DimensionMismatch("QuadraticProgram: M/bounds dimensions disagree");
    if (hi.size() != m)
        throw DimensionMismatch("QuadraticProgram: lo/hi dimensions disagree");
    for (Eigen::Index r = 0; r < m; ++r)
        if (lo[r] > hi[r])
            throw DimensionMismatch("QuadraticProgram: lo > hi in row " + std::to_string(r));
    // symmetry check, 1e-12 on the sparse pattern
    SpMat Pt = P.transpose();
    SpMat D = P - Pt;
    for (int k = 0; k < D.outerSize(); ++k)
        for (SpMat::InnerIterator it(D, k); it; ++it)
            if (std::abs(it.value()) > 1e-12)
                throw DimensionMismatch("QuadraticProgram: P is not symmetric");
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::PrimalInfeasible: return "primal_infeasible";
        case SolveStatus::DualInfeasible: return "dual_infeasible";
        case SolveStatus::MaxIter: return "max_iter";
    }
    return "unknown";
}

struct QpSolver::Impl {
    QuadraticProgram qp;   // unscaled
    SolveSettings st;

    Eigen::Index n = 0, m = 0;

    // scaled data
    SpMat Ps, Ms, MsT;
    Vec qs, los, his;
    Vec D, E;          // diagonal scalings, x = D x_s
    double cost_scale = 1.0;

    Vec rho_base;      // per-row multiplier class
    double rho = 0.1;
    Vec rho_vec, rho_inv;

    SpMat K0;          // Ms' diag(rho_base) Ms (pattern cache)
    SpMat H;           // Ps + sigma I + rho K0
    Eigen::SimplicialLDLT<SpMat> ldlt;
    bool factorized = false;
    int rho_updates = 0;

    // iterates (scaled)
    Vec x, z, y;
    bool have_iterate = false;

    Impl(QuadraticProgram qp_in, SolveSettings st_in) : qp(std::move(qp_in)), st(st_in) {
        qp.validate();
        n = qp.num_vars();
        m = qp.num_rows();
        rho = st.rho;
        setup();
    }

    void setup() {
        Ps = qp.P;
        Ms = qp.M;
        qs = qp.q;
        los = qp.lo;
        his = qp.hi;
        D = Vec::Ones(n);
        E = Vec::Ones(m);
        cost_scale = 1.0;
        if (st.scaling) ruiz();
        MsT = Ms.transpose();

        rho_base = Vec::Ones(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            const bool lo_inf = is_neg_inf(los[r]);
            const bool hi_inf = is_pos_inf(his[r]);
            if (lo_inf && hi_inf) rho_base[r] = kRhoLoose;
            else if (!lo_inf && !hi_inf && his[r] - los[r] < 1e-12) rho_base[r] = kRhoEq;
        }
        SpMat RM = Ms;
        scale_rows_inplace(RM, rho_base);
        K0 = (MsT * RM).pruned();
        factorize();
        x = Vec::Zero(n);
        z = Vec::Zero(m);
        y = Vec::Zero(m);
        have_iterate = false;
    }

    void ruiz() {
        // Modified Ruiz equilibration on [P A'; A 0] plus cost normalization.
        for (int it = 0; it < st.scaling_iters; ++it) {
            Vec cp = col_inf_norms(Ps, n);
            Vec ca = col_inf_norms(Ms, n);
            Vec dx(n), de(m);
            for (Eigen::Index i = 0; i < n; ++i) {
                double nrm = std::max(cp[i], ca[i]);
                dx[i] = (nrm > 1e-12) ? 1.0 / std::sqrt(nrm) : 1.0;
            }
            Vec ra = row_inf_norms(Ms, m);
            for (Eigen::Index r = 0; r < m; ++r)
                de[r] = (ra[r] > 1e-12) ? 1.0 / std::sqrt(ra[r]) : 1.0;

            scale_rows_inplace(Ps, dx);
            scale_cols_inplace(Ps, dx);
            scale_rows_inplace(Ms, de);
            scale_cols_inplace(Ms, dx);
            qs = qs.cwiseProduct(dx);
            D = D.cwiseProduct(dx);
            E = E.cwiseProduct(de);

            // cost scaling
            Vec pc = col_inf_norms(Ps, n);
            double mean_pc = pc.size() ? pc.mean() : 0.0;
            double g = std::max(mean_pc, inf_norm(qs));
            double c = (g > 1e-12) ? 1.0 / g : 1.0;
            Ps *= c;
            qs *= c;
            cost_scale *= c;
        }
        for (Eigen::Index r = 0; r < m; ++r) {
            if (!is_neg_inf(los[r])) los[r] *= E[r];
            if (!is_pos_inf(his[r])) his[r] *= E[r];
        }
    }

    void factorize() {
        SpMat I(n, n);
        I.setIdentity();
        H = Ps + st.sigma * I + rho * K0;
        ldlt.compute(H);
        if (ldlt.info() != Eigen::Success) {
            // regularization retry
            for (double s = 1e-5; s <= 1e-2; s *= 10) {
                H = Ps + s * I + rho * K0;
                ldlt.compute(H);
                if (ldlt.info() == Eigen::Success) { factorized = true; return; }
            }
            throw NumericalBreakdown("QpSolver: KKT factorization failed");
        }
        factorized = true;
        build_rho_vectors();
    }

    void build_rho_vectors() {
        rho_vec = rho * rho_base;
        rho_inv = rho_vec.cwiseInverse();
    }

    void update_bounds(const Vec& lo, const Vec& hi) {
        if (lo.size() != m || hi.size() != m)
            throw DimensionMismatch("update_bounds: wrong size");
        for (Eigen::Index r = 0; r < m; ++r)
            if (lo[r] > hi[r]) throw DimensionMismatch("update_bounds: lo > hi");
        for (Eigen::Index r = 0; r < m; ++r) {
            los[r] = is_neg_inf(lo[r]) ? lo[r] : lo[r] * E[r];
            his[r] = is_pos_inf(hi[r]) ? hi[r] : hi[r] * E[r];
        }
        qp.lo = lo;
        qp.hi = hi;
    }

    void update_lin_cost(const Vec& q_new) {
        if (q_new.size() != n) throw DimensionMismatch("update_lin_cost: wrong size");
        qp.q = q_new;
        qs = cost_scale * q_new.cwiseProduct(D);
    }

    void warm_start(const Vec& x0, const Vec& y0) {
        if (x0.size() != n || y0.size() != m)
            throw DimensionMismatch("warm_start: wrong size");
        x = x0.cwiseQuotient(D);
        y = cost_scale * y0.cwiseQuotient(E);
        z = Ms * x;
        clamp_z(z);
        have_iterate = true;
    }

    void clamp_z(Vec& v) const {
        for (Eigen::Index r = 0; r < m; ++r)
            v[r] = std::min(std::max(v[r], los[r]), his[r]);
    }

    // unscaled residual pieces
    struct Residuals {
        double rp = 0, rd = 0, rp_scale = 0, rd_scale = 0;
    };

    Residuals residuals(const Vec& xc, const Vec& zc, const Vec& yc,
                        const Vec& Mx, const Vec& Px, const Vec& MTy) const {
        Residuals r;
        // primal: E^-1 (Mx - z)
        double rp = 0, sp = 0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double ei = 1.0 / E[i];
            rp = std::max(rp, std::abs(Mx[i] - zc[i]) * ei);
            sp = std::max(sp, std::max(std::abs(Mx[i]) * ei, std::abs(zc[i]) * ei));
        }
        // dual: D^-1 (Px + q + M'y) / c
        double rd = 0, sd = 0;
        const double ci = 1.0 / cost_scale;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double di = 1.0 / D[i];
            rd = std::max(rd, std::abs(Px[i] + qs[i] + MTy[i]) * di * ci);
            sd = std::max(sd, di * ci * std::max({std::abs(Px[i]), std::abs(MTy[i]), std::abs(qs[i])}));
        }
        r.rp = rp; r.rd = rd; r.rp_scale = sp; r.rd_scale = sd;
        return r;
    }

    bool primal_infeasibility(const Vec& dy, Vec& cert) const {
        // certificate in unscaled units: v = c^-1 E dy
        Vec v(m);
        for (Eigen::Index i = 0; i < m; ++i) v[i] = dy[i] * E[i] / cost_scale;
        const double vn = inf_norm(v);
        if (vn < 1e-14) return false;
        Vec MTv = MsT * dy;  // scaled product; unscale columns
        double a = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            a = std::max(a, std::abs(MTv[i]) / (D[i] * cost_scale));
        if (a > st.eps_pinf * vn) return false;
        double support = 0.0;
        for (Eigen::Index r = 0; r < m; ++r) {
            if (v[r] > 0) {
                if (is_pos_inf(qp.hi[r])) return false;
                support += qp.hi[r] * v[r];
            } else if (v[r] < 0) {
                if (is_neg_inf(qp.lo[r])) return false;
                support += qp.lo[r] * v[r];
            }
        }
        if (support <= -st.eps_pinf * vn) {
            cert = v;
            return true;
        }
        return false;
    }

    bool dual_infeasibility(const Vec& dx, Vec& cert) const {
        Vec d(n);
        for (Eigen::Index i = 0; i < n; ++i) d[i] = dx[i] * D[i];
        const double dn = inf_norm(d);
        if (dn < 1e-14) return false;
        // q'd < 0
        double qd = qp.q.dot(d);
        if (qd >= -st.eps_dinf * dn) return false;
        // ||P d|| small
        Vec Pd_s = Ps * dx;
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::abs(Pd_s[i]) / (D[i] * cost_scale) > st.eps_dinf * dn) return false;
        // M d within recession bounds
        Vec Md_s = Ms * dx;
        for (Eigen::Index r = 0; r < m; ++r) {
            const double val = Md_s[r] / E[r];
            if (!is_pos_inf(qp.hi[r]) && val > st.eps_dinf * dn) return false;
            if (!is_neg_inf(qp.lo[r]) && val < -st.eps_dinf * dn) return false;
        }
        cert = d;
        return true;
    }

    void maybe_adapt_rho(const Residuals& r) {
        if (!st.adaptive_rho || rho_updates >= st.max_rho_updates) return;
        const double pr = r.rp / std::max(r.rp_scale, 1e-10);
        const double dr = r.rd / std::max(r.rd_scale, 1e-10);
        if (dr < 1e-16) return;
        double ratio = std::sqrt(pr / dr);
        if (!(ratio > 5.0 || ratio < 0.2)) return;
        double new_rho = std::clamp(rho * ratio, kRhoMin, kRhoMax);
        if (std::abs(new_rho - rho) / rho < 1e-3) return;
        rho = new_rho;
        ++rho_updates;
        factorize();
    }

    void polish(SolveResult& res) const {
        // Active set from multiplier signs.
        std::vector<Eigen::Index> act;
        std::vector<double> bact;
        std::vector<int> side;  // -1 lower, +1 upper
        act.reserve(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            if (y[r] < 0 && !is_neg_inf(los[r])) { act.push_back(r); bact.push_back(los[r]); side.push_back(-1); }
            else if (y[r] > 0 && !is_pos_inf(his[r])) { act.push_back(r); bact.push_back(his[r]); side.push_back(+1); }
        }
        const Eigen::Index na = static_cast<Eigen::Index>(act.size());
        const double delta = st.polish_delta;

        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(Ps.nonZeros() + 2 * Ms.nonZeros() + n + na);
        for (int k = 0; k < Ps.outerSize(); ++k)
            for (SpMat::InnerIterator it(Ps, k); it; ++it)
                trips.emplace_back(it.row(), it.col(), it.value());
        for (Eigen::Index i = 0; i < n; ++i) trips.emplace_back(i, i, delta);
        // map row -> active slot
        std::vector<Eigen::Index> slot(m, -1);
        for (Eigen::Index a = 0; a < na; ++a) slot[act[a]] = a;
        for (int k = 0; k < Ms.outerSize(); ++k)
            for (SpMat::InnerIterator it(Ms, k); it; ++it) {
                const Eigen::Index a = slot[it.row()];
                if (a >= 0) {
                    trips.emplace_back(n + a, it.col(), it.value());
                    trips.emplace_back(it.col(), n + a, it.value());
                }
            }
        for (Eigen::Index a = 0; a < na; ++a) trips.emplace_back(n + a, n + a, -delta);
        SpMat K(n + na, n + na);
        K.setFromTriplets(trips.begin(), trips.end());
        Eigen::SimplicialLDLT<SpMat> fac(K);
        if (fac.info() != Eigen::Success) return;

        Vec rhs(n + na);
        rhs.head(n) = -qs;
        for (Eigen::Index a = 0; a < na; ++a) rhs[n + a] = bact[a];
        Vec sol = fac.solve(rhs);
        // iterative refinement against the unregularized KKT
        for (int itref = 0; itref < st.polish_refine_steps; ++itref) {
            Vec resid(n + na);
            Vec xs = sol.head(n);
            Vec nu = sol.tail(na);
            Vec Px = Ps * xs;
            Vec Mtn = Vec::Zero(n);
            for (Eigen::Index a = 0; a < na; ++a) {
                const Eigen::Index r = act[a];
                for (SpMat::InnerIterator it(MsT, r); it; ++it)
                    Mtn[it.row()] += it.value() * nu[a];
            }
            resid.head(n) = -qs - Px - Mtn;
            for (Eigen::Index a = 0; a < na; ++a) {
                double mx = 0;
                const Eigen::Index r = act[a];
                for (SpMat::InnerIterator it(MsT, r); it; ++it)
                    mx += it.value() * xs[it.row()];
                resid[n + a] = bact[a] - mx;
            }
            sol += fac.solve(resid);
        }
        Vec xp = sol.head(n);
        Vec yp = Vec::Zero(m);
        for (Eigen::Index a = 0; a < na; ++a) yp[act[a]] = sol[n + a];
        // reject a wrong active-set guess: polished multipliers must keep the
        // sign that selected their bound
        double ymax = 1.0;
        for (Eigen::Index a = 0; a < na; ++a) ymax = std::max(ymax, std::abs(sol[n + a]));
        for (Eigen::Index a = 0; a < na; ++a) {
            const double nu = sol[n + a];
            if (side[a] < 0 && nu > 1e-9 * ymax) return;
            if (side[a] > 0 && nu < -1e-9 * ymax) return;
        }
        Vec zp = Ms * xp;
        clamp_z(zp);
        Vec Mx = Ms * xp, Px = Ps * xp, MTy = MsT * yp;
        Residuals r2 = residuals(xp, zp, yp, Mx, Px, MTy);
        if (std::max(r2.rp, r2.rd) < std::max(res.primal_res, res.dual_res)) {
            res.primal_res = r2.rp;
            res.dual_res = r2.rd;
            res.x = xp.cwiseProduct(D);
            res.y = yp.cwiseProduct(E) / cost_scale;
            res.polished = true;
        }
    }

    SolveResult run() {
        if (!have_iterate) { x.setZero(); z.setZero(); y.setZero(); }
        SolveResult res;
        Vec x_prev = x, y_prev = y;
        Vec xt(n), zt(m), rhs(n), znew(m);
        int iter = 0;
        for (iter = 1; iter <= st.max_iter; ++iter) {
            x_prev = x;
            y_prev = y;
            // x-update via normal equations
            rhs = st.sigma * x - qs + MsT * (rho_vec.cwiseProduct(z) - y);
            xt = ldlt.solve(rhs);
            zt = Ms * xt;
            x = st.alpha * xt + (1.0 - st.alpha) * x;
            znew = st.alpha * zt + (1.0 - st.alpha) * z + rho_inv.cwiseProduct(y);
            clamp_z(znew);
            y += rho_vec.cwiseProduct(st.alpha * zt + (1.0 - st.alpha) * z - znew);
            z = znew;

            if (iter % st.check_interval == 0 || iter == st.max_iter) {
                Vec Mx = Ms * x, Px = Ps * x, MTy = MsT * y;
                Residuals r = residuals(x, z, y, Mx, Px, MTy);
                const double tol_p = st.eps_abs + st.eps_rel * r.rp_scale;
                const double tol_d = st.eps_abs + st.eps_rel * r.rd_scale;
                if (r.rp <= tol_p && r.rd <= tol_d) {
                    res.status = SolveStatus::Optimal;
                    res.primal_res = r.rp;
                    res.dual_res = r.rd;
                    break;
                }
                Vec dy = y - y_prev, dx = x - x_prev, cert;
                if (primal_infeasibility(dy, cert)) {
                    res.status = SolveStatus::PrimalInfeasible;
                    res.certificate = cert;
                    break;
                }
                if (dual_infeasibility(dx, cert)) {
                    res.status = SolveStatus::DualInfeasible;
                    res.certificate = cert;
                    break;
                }
                maybe_adapt_rho(r);
            }
        }
        have_iterate = true;
        res.iterations = std::min(iter, st.max_iter);
        if (res.status == SolveStatus::MaxIter || res.status == SolveStatus::Optimal) {
            if (res.status == SolveStatus::MaxIter) {
                Vec Mx = Ms * x, Px = Ps * x, MTy = MsT * y;
                Residuals r = residuals(x, z, y, Mx, Px, MTy);
                res.primal_res = r.rp;
                res.dual_res = r.rd;
            }
            res.x = x.cwiseProduct(D);
            res.y = y.cwiseProduct(E) / cost_scale;
            if (res.status == SolveStatus::Optimal && st.polish) polish(res);
            res.objective = 0.5 * res.x.dot(qp.P * res.x) + qp.q.dot(res.x);
        } else {
            res.x = x.cwiseProduct(D);
            res.y = y.cwiseProduct(E) / cost_scale;
        }
        return res;
    }
};

QpSolver::QpSolver(QuadraticProgram qp, SolveSettings settings)
    : impl_(std::make_unique<Impl>(std::move(qp), settings)) {}
QpSolver::~QpSolver() = default;
QpSolver::QpSolver(QpSolver&&) noexcept = default;
QpSolver& QpSolver::operator=(QpSolver&&) noexcept = default;

void QpSolver::update_bounds(const Vec& lo, const Vec& hi) { impl_->update_bounds(lo, hi); }
void QpSolver::update_lin_cost(const Vec& q) { impl_->update_lin_cost(q); }
void QpSolver::warm_start(const Vec& x, const Vec& y) { impl_->warm_start(x, y); }
void QpSolver::cold_start() {
    impl_->x.setZero();
    impl_->z.setZero();
    impl_->y.setZero();
    impl_->have_iterate = false;
}
SolveResult QpSolver::solve() { return impl_->run(); }
const QuadraticProgram& QpSolver::problem() const { return impl_->qp; }
const SolveSettings& QpSolver::settings() const { return impl_->st; }

SolveResult solve_qp(const QuadraticProgram& qp, SolveSettings settings) {
    QpSolver s(qp, settings);
    return s.solve();
}

SolveResult solve_lp(const Vec& c, const SpMat& M, const Vec& lo, const Vec& hi,
                     SolveSettings settings) {
    QuadraticProgram qp;
    const Eigen::Index n = c.size();
    qp.P = SpMat(n, n);
    qp.q = c;
    qp.M = M;
    qp.lo = lo;
    qp.hi = hi;
    return solve_qp(qp, settings);
}

SolveResult solve_lp_dense(const Vec& c, const Mat& M, const Vec& lo, const Vec& hi,
                           SolveSettings settings) {
    return solve_lp(c, M.sparseView(), lo, hi, settings);
}

}  // namespace polytube
