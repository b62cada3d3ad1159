#ifndef HIRS_SDP_HPP
#define HIRS_SDP_HPP

// Small dense complex-Hermitian SDPs in trace form, solved through the real
// symmetric embedding T(X) = [[Re X, -Im X], [Im X, Re X]] with an
// infeasible-start primal-dual interior-point method (HKM search direction,
// Mehrotra predictor-corrector).
//
// Problem, in complex terms:
//
//   maximize   tr(C X) + c_s s
//   subject to tr(A_i X) + a_i s  = b_i      (equalities)
//              tr(G_j X) + g_j s <= h_j      (inequalities)
//              X Hermitian PSD, s >= 0       (s only when has_scalar)
//
// The scalar s is carried as a 1x1 cone block next to the inequality slacks.

#include "hirs/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace hirs::sdp {

enum class SdpStatus { optimal, infeasible, unbounded, max_iterations, numerical_failure };

inline const char *to_string(SdpStatus s)
{
    switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::max_iterations: return "max-iterations";
    case SdpStatus::numerical_failure: return "numerical-failure";
    }
    return "unknown";
}

struct LinearConstraint {
    ComplexMatrix matrix;
    double scalar_coeff = 0.0;
    double rhs = 0.0;
};

struct SdpProblem {
    ComplexMatrix objective;
    double scalar_objective = 0.0;
    bool has_scalar = false;
    std::vector<LinearConstraint> equalities;
    std::vector<LinearConstraint> inequalities;

    static constexpr int kMaxDim = 512;

    int dim() const { return static_cast<int>(objective.rows()); }

    void validate() const
    {
        const int n = dim();
        if (n < 1 || objective.cols() != n)
            throw DimensionError("SdpProblem: objective must be square and non-empty");
        if (n > kMaxDim)
            throw DimensionError("SdpProblem: dimension above the 512 guard");
        if (!numerics::is_hermitian(objective))
            throw DimensionError("SdpProblem: objective is not Hermitian");
        auto check = [&](const LinearConstraint &c) {
            if (c.matrix.rows() != n || c.matrix.cols() != n)
                throw DimensionError("SdpProblem: constraint matrix has the wrong size");
            if (!numerics::is_hermitian(c.matrix))
                throw DimensionError("SdpProblem: constraint matrix is not Hermitian");
            if (!has_scalar && c.scalar_coeff != 0.0)
                throw DimensionError("SdpProblem: scalar coefficient without a scalar variable");
        };
        for (const auto &c : equalities)
            check(c);
        for (const auto &c : inequalities)
            check(c);
        if (equalities.empty() && inequalities.empty())
            throw DimensionError("SdpProblem: no constraints");
    }
};

struct SolverSettings {
    int max_iterations = 200;
    double feasibility_tol = 1e-7;
    double gap_tol = 1e-6;
    // Iteration continues past the acceptance tolerances down to these.
    double target_feasibility = 1e-10;
    double target_gap = 1e-9;
    double step_fraction = 0.98;
    std::ostream *log = nullptr; // per-iteration trace when set
};

struct SdpSolution {
    SdpStatus status = SdpStatus::numerical_failure;
    ComplexMatrix X;
    double scalar = 0.0;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    int iterations = 0;
    double max_violation = 0.0; // relative, see constraint_violation()
};

/// T(X) = [[Re X, -Im X], [Im X, Re X]].
inline RealMatrix embed_hermitian_as_real(const ComplexMatrix &x)
{
    if (!numerics::is_hermitian(x))
        throw DimensionError("embed_hermitian_as_real: input is not Hermitian");
    const Eigen::Index n = x.rows();
    RealMatrix t(2 * n, 2 * n);
    t.topLeftCorner(n, n) = x.real();
    t.topRightCorner(n, n) = -x.imag();
    t.bottomLeftCorner(n, n) = x.imag();
    t.bottomRightCorner(n, n) = x.real();
    return t;
}

/// Projection of a real symmetric 2n x 2n matrix onto T-structure, read back
/// as the complex n x n matrix. Maps PSD to PSD.
inline ComplexMatrix complex_from_embedding(const RealMatrix &y)
{
    const Eigen::Index n = y.rows() / 2;
    const RealMatrix re = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
    const RealMatrix im = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
    ComplexMatrix x(n, n);
    x.real() = re;
    x.imag() = im;
    return numerics::hermitian_part(x);
}

/// Principal component of a PSD matrix and how far it is from rank one.
struct RankOneFactor {
    ComplexVector vector; // sqrt(lambda_max) * unit eigenvector
    double rank1_gap = 0.0;
    double lambda_max = 0.0;
};

inline RankOneFactor extract_rank1(const ComplexMatrix &x)
{
    const double tr = x.trace().real();
    if (!(tr > 0.0))
        throw std::domain_error("extract_rank1: trace must be positive");
    const auto eig = numerics::eig_hermitian(x);
    const Eigen::Index top = eig.values.size() - 1;
    const double lmax = std::max(0.0, eig.values(top));
    RankOneFactor out;
    out.lambda_max = lmax;
    out.vector = std::sqrt(lmax) * eig.vectors.col(top);
    out.rank1_gap = std::clamp(1.0 - lmax / tr, 0.0, 1.0);
    return out;
}

/// |tr(A X) + a s - b| / (1 + ||A||_F + |a| + |b|) for equalities, the positive
/// part of the same for inequalities; maximum over all constraints.
inline double constraint_violation(const SdpProblem &p, const ComplexMatrix &x, double s)
{
    double worst = 0.0;
    auto lhs = [&](const LinearConstraint &c) {
        return (c.matrix.cwiseProduct(x.transpose())).sum().real() + c.scalar_coeff * s;
    };
    auto scale = [](const LinearConstraint &c) {
        return 1.0 + c.matrix.norm() + std::abs(c.scalar_coeff) + std::abs(c.rhs);
    };
    for (const auto &c : p.equalities)
        worst = std::max(worst, std::abs(lhs(c) - c.rhs) / scale(c));
    for (const auto &c : p.inequalities)
        worst = std::max(worst, std::max(0.0, lhs(c) - c.rhs) / scale(c));
    return worst;
}

/// Plain-text trace-form listing: every matrix as rows of "re im" pairs.
inline void write_problem_listing(std::ostream &os, const SdpProblem &p)
{
    const auto old_precision = os.precision(17);
    auto write_matrix = [&](const ComplexMatrix &m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                os << (c ? " " : "") << m(r, c).real() << ' ' << m(r, c).imag();
            os << '\n';
        }
    };
    os << "sdp dim " << p.dim() << " scalar " << (p.has_scalar ? 1 : 0) << '\n';
    os << "objective scalar_coeff " << p.scalar_objective << '\n';
    write_matrix(p.objective);
    auto write_list = [&](const char *tag, const std::vector<LinearConstraint> &list) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            os << tag << ' ' << i << " scalar_coeff " << list[i].scalar_coeff << " rhs " << list[i].rhs
               << '\n';
            write_matrix(list[i].matrix);
        }
    };
    write_list("eq", p.equalities);
    write_list("le", p.inequalities);
    os.precision(old_precision);
}

namespace detail {

struct UnitEntry {
    int p, q;
    double v;
};

// One constraint row of the real standard-form problem:
//   <A_sdp, Y> + <a_lp, y_lp> = rhs.
struct RealRow {
    bool dense = false;
    RealMatrix mat;                 // symmetric, when dense
    std::vector<UnitEntry> units;   // expanded (p,q) entries, when sparse
    RealVector lp;                  // dense over the (small) LP block
    double rhs = 0.0;
};

struct RealProblem {
    int ns = 0;
    int nl = 0;
    RealMatrix C;
    RealVector c;
    std::vector<RealRow> rows;
};

inline RealRow make_row(const RealMatrix &sdp_part, RealVector lp, double rhs)
{
    RealRow row;
    row.lp = std::move(lp);
    row.rhs = rhs;
    const Eigen::Index n = sdp_part.rows();
    std::vector<UnitEntry> units;
    for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < n; ++r)
            if (sdp_part(r, c) != 0.0)
                units.push_back({static_cast<int>(r), static_cast<int>(c), sdp_part(r, c)});
    if (static_cast<Eigen::Index>(units.size()) <= 2 * n) {
        row.units = std::move(units);
    } else {
        row.dense = true;
        row.mat = sdp_part;
    }
    return row;
}

inline double sdp_dot(const RealRow &row, const RealMatrix &y)
{
    if (row.dense)
        return row.mat.cwiseProduct(y).sum();
    double s = 0.0;
    for (const auto &u : row.units)
        s += u.v * y(u.p, u.q);
    return s;
}

inline double row_norm(const RealRow &row)
{
    double s = row.lp.squaredNorm();
    if (row.dense)
        s += row.mat.squaredNorm();
    else
        for (const auto &u : row.units)
            s += u.v * u.v;
    return std::sqrt(s);
}

inline void scale_row(RealRow &row, double f)
{
    row.lp *= f;
    row.rhs *= f;
    if (row.dense)
        row.mat *= f;
    else
        for (auto &u : row.units)
            u.v *= f;
}

// A(Y) for a general (possibly nonsymmetric) sdp block.
inline RealVector apply(const RealProblem &P, const RealMatrix &y, const RealVector &yl)
{
    RealVector out(P.rows.size());
    for (std::size_t i = 0; i < P.rows.size(); ++i) {
        const auto &row = P.rows[i];
        double s = sdp_dot(row, y);
        if (P.nl > 0)
            s += row.lp.dot(yl);
        out(i) = s;
    }
    return out;
}

inline void apply_adjoint(const RealProblem &P, const RealVector &w, RealMatrix &s_out, RealVector &l_out)
{
    s_out.setZero(P.ns, P.ns);
    l_out.setZero(P.nl);
    for (std::size_t i = 0; i < P.rows.size(); ++i) {
        const auto &row = P.rows[i];
        if (row.dense)
            s_out += w(i) * row.mat;
        else
            for (const auto &u : row.units)
                s_out(u.p, u.q) += w(i) * u.v;
        if (P.nl > 0)
            l_out += w(i) * row.lp;
    }
}

inline RealMatrix sym(const RealMatrix &y) { return 0.5 * (y + y.transpose()); }

// Largest alpha with M + alpha * D PSD (infinity when D keeps it PSD).
inline double max_psd_step(const Eigen::LLT<RealMatrix> &llt, const RealMatrix &d)
{
    RealMatrix w = llt.matrixL().solve(d);
    w = llt.matrixL().solve(RealMatrix(w.transpose()));
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(sym(w), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

inline double max_lp_step(const RealVector &x, const RealVector &dx)
{
    double a = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < x.size(); ++k)
        if (dx(k) < 0.0)
            a = std::min(a, -x(k) / dx(k));
    return a;
}

// Drop linearly dependent rows; report inconsistency of the equality system.
// Returns false when the rows are inconsistent (no symmetric Y solves A(Y)=b).
inline bool remove_dependent_rows(RealProblem &P)
{
    const int m = static_cast<int>(P.rows.size());
    const int ns = P.ns;
    const Eigen::Index dimv = static_cast<Eigen::Index>(ns) * (ns + 1) / 2 + P.nl;
    RealMatrix R = RealMatrix::Zero(dimv, m);
    auto sym_index = [ns](int r, int c) {
        if (r > c)
            std::swap(r, c);
        // column-major packed upper triangle
        return static_cast<Eigen::Index>(c) * (c + 1) / 2 + r;
    };
    const double root2 = std::sqrt(2.0);
    for (int i = 0; i < m; ++i) {
        const auto &row = P.rows[i];
        if (row.dense) {
            for (int c = 0; c < ns; ++c)
                for (int r = 0; r <= c; ++r)
                    R(sym_index(r, c), i) = (r == c ? 1.0 : root2) * row.mat(r, c);
        } else {
            for (const auto &u : row.units) {
                if (u.p > u.q)
                    continue;
                R(sym_index(u.p, u.q), i) += (u.p == u.q ? 1.0 : root2) * u.v;
            }
        }
        for (int k = 0; k < P.nl; ++k)
            R(static_cast<Eigen::Index>(ns) * (ns + 1) / 2 + k, i) = row.lp(k);
    }
    Eigen::ColPivHouseholderQR<RealMatrix> qr(R);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    if (rank == m)
        return true;
    const auto perm = qr.colsPermutation().indices();
    std::vector<int> keep(perm.data(), perm.data() + rank);
    std::sort(keep.begin(), keep.end());
    RealMatrix Rk(dimv, rank);
    RealVector bk(rank);
    for (int j = 0; j < rank; ++j) {
        Rk.col(j) = R.col(keep[j]);
        bk(j) = P.rows[keep[j]].rhs;
    }
    Eigen::ColPivHouseholderQR<RealMatrix> qk(Rk);
    for (int i = 0; i < m; ++i) {
        if (std::binary_search(keep.begin(), keep.end(), i))
            continue;
        const RealVector coef = qk.solve(RealVector(R.col(i)));
        const double predicted = coef.dot(bk);
        if (std::abs(predicted - P.rows[i].rhs) > 1e-9 * (1.0 + std::abs(P.rows[i].rhs) + bk.norm()))
            return false;
    }
    std::vector<RealRow> kept;
    kept.reserve(rank);
    for (int j : keep)
        kept.push_back(std::move(P.rows[j]));
    P.rows = std::move(kept);
    return true;
}

class InteriorPoint {
public:
    InteriorPoint(const RealProblem &P, const SolverSettings &s) : P_(P), s_(s) {}

    struct Result {
        SdpStatus status = SdpStatus::numerical_failure;
        RealMatrix X;
        RealVector x;
        double pobj = 0.0, dobj = 0.0;
        int iterations = 0;
    };

    Result run()
    {
        const int ns = P_.ns, nl = P_.nl;
        const int m = static_cast<int>(P_.rows.size());
        b_.resize(m);
        for (int i = 0; i < m; ++i)
            b_(i) = P_.rows[i].rhs;
        const double bnorm = b_.norm();
        const double cnorm = std::sqrt(P_.C.squaredNorm() + P_.c.squaredNorm());
        const double ntot = ns + nl;

        double bmax = 0.0;
        for (int i = 0; i < m; ++i)
            bmax = std::max(bmax, (1.0 + std::abs(b_(i))) / (1.0 + row_norm(P_.rows[i])));
        const double xi = std::max({10.0, std::sqrt(ntot), ntot * bmax});
        const double eta = std::max({10.0, std::sqrt(ntot), cnorm});
        X_ = xi * RealMatrix::Identity(ns, ns);
        x_ = RealVector::Constant(nl, xi);
        Z_ = eta * RealMatrix::Identity(ns, ns);
        z_ = RealVector::Constant(nl, eta);
        y_ = RealVector::Zero(m);

        Result res;
        int stalls = 0;
        double best_merit = std::numeric_limits<double>::infinity();
        // Best acceptable iterate so far; late iterates can lose accuracy
        // once the data's own rounding floor is reached.
        Result kept;
        double kept_merit = std::numeric_limits<double>::infinity();
        bool have_kept = false;
        auto finish_with_kept = [&](SdpStatus fallback) {
            if (have_kept) {
                kept.iterations = res.iterations;
                kept.status = SdpStatus::optimal;
                res = std::move(kept);
                return true;
            }
            res.status = fallback;
            return false;
        };
        bool done = false;
        for (int it = 0; it <= s_.max_iterations; ++it) {
            res.iterations = it;
            RealMatrix aty;
            RealVector atyl;
            apply_adjoint(P_, y_, aty, atyl);
            Rd_ = P_.C - aty - Z_;
            rd_ = P_.c - atyl - z_;
            Rp_ = b_ - apply(P_, X_, x_);
            const double pobj = P_.C.cwiseProduct(X_).sum() + (nl ? P_.c.dot(x_) : 0.0);
            const double dobj = b_.dot(y_);
            const double pinf = Rp_.norm() / (1.0 + bnorm);
            const double dinf = std::sqrt(Rd_.squaredNorm() + rd_.squaredNorm()) / (1.0 + cnorm);
            // Data are unit-normalized, so objective values can be far below 1;
            // the gap is measured relative to them with a small absolute floor.
            const double gap = std::abs(pobj - dobj) / (std::max(std::abs(pobj), std::abs(dobj)) + 1e-12);
            res.pobj = pobj;
            res.dobj = dobj;
            last_pinf_ = pinf;
            last_dinf_ = dinf;
            last_gap_ = gap;
            if (s_.log)
                *s_.log << "it " << it << " pobj " << pobj << " dobj " << dobj << " pinf " << pinf << " dinf "
                        << dinf << " gap " << gap << " |y| " << y_.norm() << " |X| " << X_.norm() << '\n';

            const double merit = std::max({pinf, dinf, gap});
            if (acceptable() && merit < kept_merit) {
                kept_merit = merit;
                kept.X = X_;
                kept.x = x_;
                kept.pobj = pobj;
                kept.dobj = dobj;
                have_kept = true;
            }
            if (pinf <= s_.target_feasibility && dinf <= s_.target_feasibility && gap <= s_.target_gap) {
                res.status = SdpStatus::optimal;
                break;
            }
            if (primal_infeasibility_certificate(aty, atyl, dobj)) {
                res.status = SdpStatus::infeasible;
                break;
            }
            if (dual_infeasibility_certificate(pobj)) {
                res.status = SdpStatus::unbounded;
                break;
            }
            if (it == s_.max_iterations) {
                finish_with_kept(SdpStatus::max_iterations);
                done = true;
                break;
            }
            // Near-converged iterates that stop improving are accepted.
            if (merit < 0.5 * best_merit) {
                best_merit = merit;
                stalls = 0;
            } else if (++stalls >= 8 && have_kept) {
                finish_with_kept(SdpStatus::optimal);
                done = true;
                break;
            }
            if (!step()) {
                finish_with_kept(SdpStatus::numerical_failure);
                done = true;
                break;
            }
        }
        if (done && res.status == SdpStatus::optimal)
            return res;
        res.X = X_;
        res.x = x_;
        return res;
    }

private:
    bool acceptable() const
    {
        return last_pinf_ <= s_.feasibility_tol && last_dinf_ <= s_.feasibility_tol &&
               last_gap_ <= 0.5 * s_.gap_tol;
    }

    // y with b^T y > 0 and A^T y <= 0 proves the primal empty (Farkas).
    bool primal_infeasibility_certificate(const RealMatrix &aty, const RealVector &atyl, double dobj) const
    {
        if (!(dobj > 0.0) || y_.norm() < 1e3)
            return false;
        const double scale = dobj;
        double top = P_.nl ? atyl.maxCoeff() : -std::numeric_limits<double>::infinity();
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(sym(aty), Eigen::EigenvaluesOnly);
        top = std::max(top, es.eigenvalues()(es.eigenvalues().size() - 1));
        return top <= 1e-8 * scale;
    }

    // X >= 0 with A(X) ~ 0 and <C,X> < 0 proves the dual empty.
    bool dual_infeasibility_certificate(double pobj) const
    {
        if (!(pobj < 0.0))
            return false;
        const RealVector ax = b_ - Rp_;
        const double xnorm = std::sqrt(X_.squaredNorm() + x_.squaredNorm());
        if (xnorm < 1e3)
            return false;
        return ax.norm() <= 1e-8 * (-pobj);
    }

    struct Direction {
        RealMatrix dX, dZ;
        RealVector dx, dz, dy;
    };

    Direction solve_direction(const RealMatrix &Rc, const RealVector &rc)
    {
        Direction d;
        const RealVector rhs = Rp_ - apply(P_, Rc, rc) + rd_term_;
        d.dy = schur_.solve(rhs);
        RealMatrix atdy;
        RealVector atdyl;
        apply_adjoint(P_, d.dy, atdy, atdyl);
        d.dZ = Rd_ - atdy;
        d.dz = rd_ - atdyl;
        d.dX = Rc - sym(X_ * d.dZ * Zinv_);
        d.dx = rc - x_.cwiseProduct(d.dz).cwiseQuotient(z_);
        return d;
    }

    bool build_schur()
    {
        const int m = static_cast<int>(P_.rows.size());
        RealMatrix M = RealMatrix::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            const auto &rj = P_.rows[j];
            if (!rj.dense)
                continue;
            const RealMatrix G = X_ * rj.mat * Zinv_;
            for (int i = 0; i < m; ++i) {
                const double v = sdp_dot(P_.rows[i], G);
                M(i, j) = v;
                M(j, i) = v;
            }
        }
        for (int i = 0; i < m; ++i) {
            const auto &ri = P_.rows[i];
            if (ri.dense)
                continue;
            for (int j = i; j < m; ++j) {
                const auto &rj = P_.rows[j];
                if (rj.dense)
                    continue;
                double s = 0.0;
                for (const auto &e : ri.units)
                    for (const auto &f : rj.units)
                        s += e.v * f.v * X_(e.q, f.p) * Zinv_(f.q, e.p);
                M(i, j) = s;
                M(j, i) = s;
            }
        }
        if (P_.nl > 0) {
            RealMatrix L(m, P_.nl);
            for (int i = 0; i < m; ++i)
                L.row(i) = P_.rows[i].lp.transpose();
            const RealVector w = x_.cwiseQuotient(z_);
            M += L * w.asDiagonal() * L.transpose();
        }
        M = sym(M);
        schur_.compute(M);
        if (schur_.info() == Eigen::Success)
            return true;
        // Tiny diagonal shift for nearly dependent rows.
        const double shift = 1e-13 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
        M.diagonal().array() += shift;
        schur_.compute(M);
        return schur_.info() == Eigen::Success;
    }

    bool step()
    {
        const int nl = P_.nl;
        const double ntot = P_.ns + nl;
        Eigen::LLT<RealMatrix> zllt(Z_);
        Eigen::LLT<RealMatrix> xllt(X_);
        if (zllt.info() != Eigen::Success || xllt.info() != Eigen::Success)
            return false;
        Zinv_ = zllt.solve(RealMatrix::Identity(P_.ns, P_.ns));
        Zinv_ = sym(Zinv_);
        if (!build_schur())
            return false;
        rd_term_ = apply(P_, X_ * Rd_ * Zinv_, x_.cwiseProduct(rd_).cwiseQuotient(z_));

        const double mu = (X_.cwiseProduct(Z_).sum() + (nl ? x_.dot(z_) : 0.0)) / ntot;

        // Predictor (affine scaling).
        const Direction aff = solve_direction(-X_, -x_);
        double ap = std::min(1.0, std::min(max_psd_step(xllt, aff.dX), max_lp_step(x_, aff.dx)));
        double ad = std::min(1.0, std::min(max_psd_step(zllt, aff.dZ), max_lp_step(z_, aff.dz)));
        const RealMatrix Xa = X_ + ap * aff.dX;
        const RealMatrix Za = Z_ + ad * aff.dZ;
        const RealVector xa = x_ + ap * aff.dx;
        const RealVector za = z_ + ad * aff.dz;
        const double mu_aff = (Xa.cwiseProduct(Za).sum() + (nl ? xa.dot(za) : 0.0)) / ntot;
        const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

        // Corrector.
        const RealMatrix Rc = sigma * mu * Zinv_ - X_ - sym(aff.dX * aff.dZ * Zinv_);
        const RealVector rc = (sigma * mu) * z_.cwiseInverse() - x_ -
                              aff.dx.cwiseProduct(aff.dz).cwiseQuotient(z_);
        const Direction d = solve_direction(Rc, rc);
        if (!d.dy.allFinite() || !d.dX.allFinite() || !d.dZ.allFinite())
            return false;
        ap = std::min(1.0, s_.step_fraction * std::min(max_psd_step(xllt, d.dX), max_lp_step(x_, d.dx)));
        ad = std::min(1.0, s_.step_fraction * std::min(max_psd_step(zllt, d.dZ), max_lp_step(z_, d.dz)));
        if (ap < 1e-12 && ad < 1e-12)
            return false;
        X_ = sym(X_ + ap * d.dX);
        x_ += ap * d.dx;
        Z_ = sym(Z_ + ad * d.dZ);
        z_ += ad * d.dz;
        y_ += ad * d.dy;
        return true;
    }

    const RealProblem &P_;
    SolverSettings s_;
    RealVector b_;
    RealMatrix X_, Z_, Zinv_, Rd_;
    RealVector x_, z_, y_, rd_, Rp_, rd_term_;
    Eigen::LLT<RealMatrix> schur_;
    double last_pinf_ = 1.0, last_dinf_ = 1.0, last_gap_ = 1.0;
};

} // namespace detail

/// Solves the complex SDP. Deterministic for fixed inputs and settings;
/// infeasible, unbounded, iteration-limit and numerical outcomes are each
/// reported through status.
inline SdpSolution solve_sdp(const SdpProblem &p, const SolverSettings &settings = {})
{
    p.validate();
    const int n = p.dim();
    const int n_ineq = static_cast<int>(p.inequalities.size());
    const int scalar_slot = p.has_scalar ? 0 : -1;
    const int slack0 = p.has_scalar ? 1 : 0;

    detail::RealProblem P;
    P.ns = 2 * n;
    P.nl = slack0 + n_ineq;
    // Trace identity under the embedding: tr(T(A) T(X)) = 2 tr(A X).
    P.C = -0.5 * embed_hermitian_as_real(numerics::hermitian_part(p.objective));
    P.c = RealVector::Zero(P.nl);
    if (p.has_scalar)
        P.c(scalar_slot) = -p.scalar_objective;

    auto add = [&](const LinearConstraint &c, int slack) {
        RealVector lp = RealVector::Zero(P.nl);
        if (p.has_scalar)
            lp(scalar_slot) = c.scalar_coeff;
        if (slack >= 0)
            lp(slack) = 1.0;
        P.rows.push_back(detail::make_row(0.5 * embed_hermitian_as_real(numerics::hermitian_part(c.matrix)),
                                          std::move(lp), c.rhs));
    };
    for (const auto &c : p.equalities)
        add(c, -1);
    for (int j = 0; j < n_ineq; ++j)
        add(p.inequalities[j], slack0 + j);

    // Unit-norm rows and objective. An inequality is normalized without its
    // slack, whose coefficient is then reset to 1 (a rescaled slack). Rows
    // with nothing but a slack either prove infeasibility or are vacuous; the
    // vacuous ones keep a positive right-hand side so the slack stays interior.
    SdpSolution sol;
    const int n_eq = static_cast<int>(p.equalities.size());
    std::vector<detail::RealRow> rows;
    for (int i = 0; i < static_cast<int>(P.rows.size()); ++i) {
        auto &row = P.rows[i];
        const int slack = i >= n_eq ? slack0 + (i - n_eq) : -1;
        if (slack >= 0)
            row.lp(slack) = 0.0;
        const double nr = detail::row_norm(row);
        if (nr == 0.0) {
            if (slack < 0 ? row.rhs != 0.0 : row.rhs < 0.0) {
                sol.status = SdpStatus::infeasible;
                return sol;
            }
            if (slack < 0)
                continue;
            row.rhs = 1.0;
        } else {
            detail::scale_row(row, 1.0 / nr);
        }
        if (slack >= 0)
            row.lp(slack) = 1.0;
        rows.push_back(std::move(row));
    }
    P.rows = std::move(rows);
    const double cscale = std::sqrt(P.C.squaredNorm() + P.c.squaredNorm());
    if (cscale > 0.0) {
        P.C /= cscale;
        P.c /= cscale;
    }
    if (!detail::remove_dependent_rows(P)) {
        sol.status = SdpStatus::infeasible;
        return sol;
    }

    detail::InteriorPoint ipm(P, settings);
    const auto r = ipm.run();
    const double objscale = cscale > 0.0 ? cscale : 1.0;
    sol.status = r.status;
    sol.iterations = r.iterations;
    sol.X = complex_from_embedding(r.X);
    sol.scalar = p.has_scalar ? r.x(scalar_slot) : 0.0;
    sol.primal_objective = (p.objective.cwiseProduct(sol.X.transpose())).sum().real() +
                           (p.has_scalar ? p.scalar_objective * sol.scalar : 0.0);
    sol.dual_objective = -r.dobj * objscale;
    sol.max_violation = constraint_violation(p, sol.X, sol.scalar);
    if (sol.status == SdpStatus::optimal) {
        const double gap = std::abs(sol.primal_objective - sol.dual_objective);
        if (gap > settings.gap_tol * (1.0 + std::abs(sol.primal_objective)) ||
            sol.max_violation > settings.feasibility_tol * 10.0)
            sol.status = SdpStatus::numerical_failure;
    }
    return sol;
}

} // namespace hirs::sdp

#endif // HIRS_SDP_HPP
