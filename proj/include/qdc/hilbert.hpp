// hilbert.hpp - truncated emitter (x) cavity Hilbert space, operators and states
//
// Basis ordering: |e, n> -> index e * (N + 1) + n, with emitter levels
// e = 0 (crystal ground |0>), 1 (exciton |X>), 2 (higher state |f>, optional)
// and cavity Fock states n = 0..N.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace qdc {

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using CMatrixd = CMatrix<double>;
using CVectord = CVector<double>;
using Complex = std::complex<double>;

struct SystemSpace {
    int emitter_levels = 2;
    int fock_cutoff = 2;

    int fock_dim() const noexcept { return fock_cutoff + 1; }
    int dim() const noexcept { return emitter_levels * fock_dim(); }
    int index(int level, int photons) const noexcept { return level * fock_dim() + photons; }

    void validate() const {
        if (emitter_levels != 2 && emitter_levels != 3) {
            throw std::invalid_argument("SystemSpace: emitter_levels must be 2 or 3, got " +
                                        std::to_string(emitter_levels));
        }
        if (fock_cutoff < 1) {
            throw std::invalid_argument("SystemSpace: fock_cutoff must be >= 1, got " +
                                        std::to_string(fock_cutoff));
        }
    }

    friend bool operator==(const SystemSpace&, const SystemSpace&) = default;
};

inline SystemSpace make_space(int emitter_levels, int fock_cutoff) {
    SystemSpace s{emitter_levels, fock_cutoff};
    s.validate();
    return s;
}

// ------------------------------- Kronecker product ---------------------------

template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& A, const Eigen::MatrixBase<DerivedB>& B) {
    using Scalar = typename DerivedA::Scalar;
    static_assert(std::is_same_v<Scalar, typename DerivedB::Scalar>,
                  "kron: operands must share a scalar type");
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(A.rows() * B.rows(),
                                                              A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
        }
    }
    return out;
}

template <typename DerivedA, typename DerivedB>
auto commutator(const Eigen::MatrixBase<DerivedA>& A, const Eigen::MatrixBase<DerivedB>& B) {
    return (A * B - B * A).eval();
}

// ------------------------------- Operator set --------------------------------

template <typename Real>
struct SystemOperators {
    SystemSpace space;
    CMatrix<Real> identity;
    CMatrix<Real> sigma_z;       // |X><X| - |0><0|
    CMatrix<Real> sigma_minus;   // |0><X|
    CMatrix<Real> sigma_plus;    // |X><0|
    CMatrix<Real> a;             // cavity annihilation, truncated
    CMatrix<Real> a_dag;
    CMatrix<Real> number;        // a^dag a
    CMatrix<Real> excited;       // sigma_plus sigma_minus = |X><X|
    CMatrix<Real> ground;        // |0><0|
    // Three-level extension; zero-sized when emitter_levels == 2.
    CMatrix<Real> f_projector;   // |f><f|
    CMatrix<Real> x_from_f;      // |X><f|

    bool has_f_level() const noexcept { return space.emitter_levels == 3; }

    // Projector onto emitter level |level> (x) 1_cavity.
    CMatrix<Real> level_projector(int level) const {
        const int ne = space.emitter_levels;
        if (level < 0 || level >= ne) throw std::out_of_range("level_projector: bad level");
        CMatrix<Real> p = CMatrix<Real>::Zero(ne, ne);
        p(level, level) = 1;
        return kron(p, CMatrix<Real>::Identity(space.fock_dim(), space.fock_dim()));
    }
};

template <typename Real = double>
SystemOperators<Real> build_system_operators(const SystemSpace& space) {
    space.validate();
    using M = CMatrix<Real>;
    const int ne = space.emitter_levels;
    const int nf = space.fock_dim();

    M emitter_lower = M::Zero(ne, ne);  // |0><X|
    emitter_lower(0, 1) = 1;
    M emitter_z = M::Zero(ne, ne);
    emitter_z(1, 1) = 1;
    emitter_z(0, 0) = -1;
    M cavity_a = M::Zero(nf, nf);
    for (int n = 1; n < nf; ++n) cavity_a(n - 1, n) = std::sqrt(static_cast<Real>(n));

    const M id_e = M::Identity(ne, ne);
    const M id_c = M::Identity(nf, nf);

    SystemOperators<Real> ops;
    ops.space = space;
    ops.identity = M::Identity(space.dim(), space.dim());
    ops.sigma_minus = kron(emitter_lower, id_c);
    ops.sigma_plus = ops.sigma_minus.adjoint();
    ops.sigma_z = kron(emitter_z, id_c);
    ops.a = kron(id_e, cavity_a);
    ops.a_dag = ops.a.adjoint();
    ops.number = ops.a_dag * ops.a;
    ops.excited = ops.sigma_plus * ops.sigma_minus;
    ops.ground = ops.sigma_minus * ops.sigma_plus;
    if (ne == 3) {
        M ff = M::Zero(ne, ne);
        ff(2, 2) = 1;
        M xf = M::Zero(ne, ne);
        xf(1, 2) = 1;
        ops.f_projector = kron(ff, id_c);
        ops.x_from_f = kron(xf, id_c);
    }
    return ops;
}

// ------------------------------- States --------------------------------------

template <typename Real = double>
CVector<Real> basis_state(const SystemSpace& space, int level, int photons) {
    CVector<Real> psi = CVector<Real>::Zero(space.dim());
    psi(space.index(level, photons)) = 1;
    return psi;
}

template <typename Real = double>
CMatrix<Real> pure_density(const CVector<Real>& psi) {
    return psi * psi.adjoint();
}

template <typename Real = double>
CMatrix<Real> ground_density(const SystemSpace& space) {
    return pure_density<Real>(basis_state<Real>(space, 0, 0));
}

// ------------------------------- Expectation values --------------------------

template <typename DerivedOp, typename DerivedRho>
auto expectation(const Eigen::MatrixBase<DerivedOp>& op, const Eigen::MatrixBase<DerivedRho>& state) {
    if (op.rows() != op.cols()) throw std::invalid_argument("expectation: operator not square");
    if constexpr (DerivedRho::ColsAtCompileTime == 1) {
        if (state.rows() != op.cols())
            throw std::invalid_argument("expectation: dimension mismatch");
        return state.dot(op * state);  // <psi|op|psi>, dot conjugates the left operand
    } else {
        if (state.rows() != op.cols() || state.cols() != op.rows())
            throw std::invalid_argument("expectation: dimension mismatch");
        return (op * state).trace();
    }
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol = 1e-10) {
    return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

// Smallest eigenvalue of the Hermitian part of a density matrix.
template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& rho) {
    using M = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const M herm = (rho + rho.adjoint()) / 2;
    Eigen::SelfAdjointEigenSolver<M> es(herm, Eigen::EigenvaluesOnly);
    return static_cast<double>(es.eigenvalues().minCoeff());
}

}  // namespace qdc
