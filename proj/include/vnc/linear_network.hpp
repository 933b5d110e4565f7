// Transfer matrices of the beam-splitter networks and coherent-amplitude
// propagation u = A v.
//
// All constructors are templated on the real scalar type; the complex
// matrices are plain Eigen dense types so they compose with ordinary Eigen
// expressions.
#ifndef VNC_LINEAR_NETWORK_HPP
#define VNC_LINEAR_NETWORK_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace vnc {

template <typename Scalar>
using TransferMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using AmplitudeVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

using TransferMatrixd = TransferMatrix<double>;
using AmplitudeVectord = AmplitudeVector<double>;

namespace detail {

template <typename Scalar>
void require_transmission(Scalar t, const char* name)
{
    if (!(t >= Scalar(0) && t <= Scalar(1))) {
        throw std::domain_error(std::string(name) + " must lie in [0, 1], got " + std::to_string(double(t)));
    }
}

} // namespace detail

/// Two-mode beam splitter [[sqrt(T), sqrt(1-T)], [-sqrt(1-T), sqrt(T)]].
template <typename Scalar>
TransferMatrix<Scalar> bs_matrix(Scalar t)
{
    detail::require_transmission(t, "transmission");
    using std::sqrt;
    const Scalar tr = sqrt(t);
    const Scalar rf = sqrt(Scalar(1) - t);
    TransferMatrix<Scalar> m(2, 2);
    m << tr, rf, -rf, tr;
    return m;
}

/// diag(1, exp(i phase)): phase delay on the second arm.
template <typename Scalar>
TransferMatrix<Scalar> phase_shift(Scalar phase)
{
    TransferMatrix<Scalar> m = TransferMatrix<Scalar>::Identity(2, 2);
    m(1, 1) = std::polar(Scalar(1), phase);
    return m;
}

/// Mach-Zehnder interferometer BS(t2) * phase * BS(t1).
///
/// Outputs are ordered so that row 0 feeds detector 1, the port whose
/// single-input intensity is T1 R2 + T2 R1 + 2 cos(phase) sqrt(T1 T2 R1 R2).
/// That is the second output of the bare composition, so the two rows are
/// swapped after composing.
template <typename Scalar>
TransferMatrix<Scalar> mz_matrix(Scalar t1, Scalar t2, Scalar phase)
{
    detail::require_transmission(t1, "t1");
    detail::require_transmission(t2, "t2");
    TransferMatrix<Scalar> composed = bs_matrix(t2) * phase_shift(phase) * bs_matrix(t1);
    composed.row(0).swap(composed.row(1));
    return composed;
}

/// Three-mode network BS2 (modes 2,3) after BS1 (modes 1,2):
///
///   [  sqrt(T1)        sqrt(R1)       0        ]
///   [ -sqrt(R1 T2)     sqrt(T1 T2)    sqrt(R2) ]
///   [  sqrt(R1 R2)    -sqrt(T1 R2)    sqrt(T2) ]
template <typename Scalar>
TransferMatrix<Scalar> three_mode_matrix(Scalar t1, Scalar t2)
{
    detail::require_transmission(t1, "t1");
    detail::require_transmission(t2, "t2");
    using std::sqrt;
    const Scalar r1 = Scalar(1) - t1;
    const Scalar r2 = Scalar(1) - t2;
    TransferMatrix<Scalar> m(3, 3);
    m << sqrt(t1), sqrt(r1), Scalar(0),
         -sqrt(r1 * t2), sqrt(t1 * t2), sqrt(r2),
         sqrt(r1 * r2), -sqrt(t1 * r2), sqrt(t2);
    return m;
}

/// u = m v.
template <typename DerivedM, typename DerivedV>
AmplitudeVector<typename DerivedM::RealScalar> propagate(const Eigen::MatrixBase<DerivedM>& m,
                                                         const Eigen::MatrixBase<DerivedV>& v)
{
    if (m.cols() != v.rows() || v.cols() != 1) {
        throw std::invalid_argument("propagate: amplitude vector of length " + std::to_string(v.rows()) +
                                    " does not match a " + std::to_string(m.cols()) + "-mode network");
    }
    return m * v;
}

/// |u_i|^2 per mode.
template <typename Derived>
Eigen::Matrix<typename Derived::RealScalar, Eigen::Dynamic, 1> intensities(const Eigen::MatrixBase<Derived>& u)
{
    return u.cwiseAbs2();
}

/// Entrywise check of m^H m = I.
template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& m, typename Derived::RealScalar tol = 1e-12)
{
    if (m.rows() != m.cols()) {
        return false;
    }
    const auto gram = (m.adjoint() * m).eval();
    const auto identity = Derived::PlainObject::Identity(m.rows(), m.cols());
    return (gram - identity).cwiseAbs().maxCoeff() <= tol;
}

} // namespace vnc

#endif // VNC_LINEAR_NETWORK_HPP
