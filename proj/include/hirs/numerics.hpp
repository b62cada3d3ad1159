#ifndef HIRS_NUMERICS_HPP
#define HIRS_NUMERICS_HPP

// Dense complex linear algebra shared by both optimizers: column-stacking
// vectorization, Kronecker/Hadamard products and Hermitian spectral tools.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace hirs {

using cd = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Raised when an operand breaks a structural precondition (shape, symmetry).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a matrix expected to be positive definite is not.
class NotPositiveDefinite : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

namespace numerics {

inline constexpr std::size_t kMaxEntries = 10'000'000;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPdFloor = 1e-12;

inline void check_entry_budget(std::size_t rows, std::size_t cols, const char *what)
{
    if (rows != 0 && cols > kMaxEntries / rows)
        throw DimensionError(std::string(what) + ": result exceeds 1e7 entries");
}

/// Column-stacking vectorization.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> vec(const Eigen::MatrixBase<Derived> &x)
{
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out(x.size());
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            out(k++) = x(r, c);
    return out;
}

/// Inverse of vec for a known row count.
inline ComplexMatrix unvec(const ComplexVector &v, Eigen::Index rows)
{
    if (rows <= 0 || v.size() % rows != 0)
        throw DimensionError("unvec: length not divisible by row count");
    const Eigen::Index cols = v.size() / rows;
    ComplexMatrix out(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r)
            out(r, c) = v(k++);
    return out;
}

template <typename DA, typename DB>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
kron(const Eigen::MatrixBase<DA> &a, const Eigen::MatrixBase<DB> &b)
{
    const auto rows = static_cast<std::size_t>(a.rows() * b.rows());
    const auto cols = static_cast<std::size_t>(a.cols() * b.cols());
    check_entry_budget(rows, cols, "kron");
    Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                                           a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

template <typename DA, typename DB>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
hadamard(const Eigen::MatrixBase<DA> &a, const Eigen::MatrixBase<DB> &b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("hadamard: shape mismatch");
    return a.cwiseProduct(b);
}

inline bool is_hermitian(const ComplexMatrix &x, double rel_tol = kHermitianTol)
{
    if (x.rows() != x.cols())
        return false;
    const double scale = x.norm();
    return (x - x.adjoint()).norm() <= rel_tol * (scale > 0.0 ? scale : 1.0);
}

inline ComplexMatrix hermitian_part(const ComplexMatrix &x)
{
    return 0.5 * (x + x.adjoint());
}

/// Eigenvalues in ascending order and the unitary matrix of eigenvectors.
struct HermitianEigen {
    RealVector values;
    ComplexMatrix vectors;
};

inline HermitianEigen eig_hermitian(const ComplexMatrix &x)
{
    if (!is_hermitian(x))
        throw DimensionError("eig_hermitian: input is not Hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(x));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eig_hermitian: eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

/// X^{-1/2} = Q diag(1/sqrt(lambda)) Q^H for positive-definite Hermitian X.
inline ComplexMatrix inv_sqrt_hermitian(const ComplexMatrix &x)
{
    const auto eig = eig_hermitian(x);
    const double floor = kPdFloor * std::max(1.0, eig.values.cwiseAbs().maxCoeff());
    if (eig.values.minCoeff() <= floor)
        throw NotPositiveDefinite("inv_sqrt_hermitian: smallest eigenvalue is not positive");
    const RealVector scale = eig.values.cwiseSqrt().cwiseInverse();
    return eig.vectors * scale.asDiagonal() * eig.vectors.adjoint();
}

struct GeneralizedEigenpair {
    double value;
    ComplexVector vector; // unit 2-norm
};

/// Dominant eigenpair of h2^{-1} h1 with h1 Hermitian PSD and h2 Hermitian PD.
///
/// Reduced through the Cholesky factor h2 = L L^H to the Hermitian problem
/// L^{-1} h1 L^{-H}, whose top eigenvector w maps back as v = L^{-H} w.
/// Ties in the top eigenvalue resolve to the eigenvector the tridiagonal
/// solver orders last.
inline GeneralizedEigenpair generalized_eig_max(const ComplexMatrix &h1, const ComplexMatrix &h2)
{
    if (h1.rows() != h2.rows() || h1.cols() != h2.cols())
        throw DimensionError("generalized_eig_max: shape mismatch");
    if (!is_hermitian(h1) || !is_hermitian(h2))
        throw DimensionError("generalized_eig_max: inputs must be Hermitian");
    Eigen::LLT<ComplexMatrix> llt(hermitian_part(h2));
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("generalized_eig_max: h2 is singular or indefinite");
    const ComplexMatrix L = llt.matrixL();
    const double diag_min = L.diagonal().real().minCoeff();
    const double diag_max = L.diagonal().real().maxCoeff();
    if (!(diag_min > std::sqrt(kPdFloor) * diag_max))
        throw NotPositiveDefinite("generalized_eig_max: h2 is numerically singular");

    ComplexMatrix reduced = llt.matrixL().solve(hermitian_part(h1));
    reduced = llt.matrixL().solve(ComplexMatrix(reduced.adjoint()));
    const auto eig = eig_hermitian(hermitian_part(reduced));
    const Eigen::Index top = eig.values.size() - 1;
    ComplexVector v = llt.matrixU().solve(ComplexVector(eig.vectors.col(top)));
    v.normalize();
    return {eig.values(top), v};
}

/// Quotient v^H h1 v / v^H h2 v.
inline double rayleigh_quotient(const ComplexMatrix &h1, const ComplexMatrix &h2, const ComplexVector &v)
{
    return (v.dot(h1 * v)).real() / (v.dot(h2 * v)).real();
}

} // namespace numerics
} // namespace hirs

#endif // HIRS_NUMERICS_HPP
