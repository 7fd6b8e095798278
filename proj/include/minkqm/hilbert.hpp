#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

#include "minkqm/errors.hpp"

namespace minkqm::hilbert {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Dims = std::vector<Eigen::Index>;

inline Eigen::Index total_dim(const Dims& dims) {
    Eigen::Index n = 1;
    for (auto d : dims) n *= d;
    return n;
}

/// State vector on a small tensor-product space.
struct Ket {
    Dims dims;
    Vec amps;

    double norm() const { return amps.norm(); }
};

/// Operator on the same kind of space.
struct LinOp {
    Dims dims;
    Mat mat;
};

struct EigenSpace {
    double eigenvalue = 0.0;
    Mat projector;
};

/// Eigenvalues (grouped across degeneracy) with eigenspace projectors.
struct SpectralDecomp {
    std::vector<EigenSpace> spaces;  // sorted by eigenvalue
};

struct CommuteReport {
    bool commute = false;
    double max_entry = 0.0;  // largest |[A,B]| entry
};

Mat kron(const Mat& a, const Mat& b);
Vec kron(const Vec& a, const Vec& b);

Mat dagger(const Mat& m);
bool is_hermitian(const Mat& m, double tol = 1e-12);

Mat sigma_x();
Mat sigma_y();
Mat sigma_z();
Mat identity(Eigen::Index n);

/// u.sigma for a spatial unit vector u; eigenvalues exactly +-1.
LinOp pauli(const std::array<double, 3>& u);

/// Operator acting on one tensor factor, identity on the rest.
LinOp embed(const LinOp& op, std::size_t subsystem, const Dims& dims);

Ket basis_ket(const Dims& dims, Eigen::Index index);
Ket tensor(const Ket& a, const Ket& b);

/// (|ud> - |du>)/sqrt(2) on dims {2,2}.
Ket singlet();

/// |psi-><psi-| built algebraically as (1 - SWAP)/2; entries are exact
/// dyadics, unlike the outer product of the irrational state vector.
LinOp singlet_projector();
LinOp triplet_projector();

/// SWAP on two qubits.
LinOp swap_gate();

/// sigma_tot_z etc: embedded single-particle operator summed over both spins.
LinOp sigma_total(const Mat& single, const Dims& dims = {2, 2});

/// (sigma_tot)^2 = 4 + 4 SWAP on two spins; integer entries.
LinOp sigma_total_squared();

SpectralDecomp spectral(const LinOp& op);

/// Reduced density matrix of one subsystem.
LinOp partial_trace(const LinOp& rho, std::size_t keep);

CommuteReport commutes(const LinOp& a, const LinOp& b);

/// |<a|b>|^2 normalized by both norms, so global phase and overall scale
/// never matter.
double fidelity(const Vec& a, const Vec& b);

/// exp(-i k B) for hermitian B, via its spectral decomposition.
LinOp exp_hermitian(const LinOp& b, double k);

Mat outer(const Vec& v);

}  // namespace minkqm::hilbert
