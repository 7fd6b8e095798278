#include "minkqm/hilbert.hpp"

#include <algorithm>
#include <cmath>

namespace minkqm::hilbert {

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Vec kron(const Vec& a, const Vec& b) {
    Vec out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

Mat dagger(const Mat& m) { return m.adjoint(); }

bool is_hermitian(const Mat& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Mat sigma_x() {
    Mat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Mat sigma_y() {
    Mat m(2, 2);
    m << 0, Cplx(0, -1), Cplx(0, 1), 0;
    return m;
}

Mat sigma_z() {
    Mat m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Mat identity(Eigen::Index n) { return Mat::Identity(n, n); }

LinOp pauli(const std::array<double, 3>& u) {
    const double n = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    if (std::abs(n - 1.0) > 1e-12) throw NotUnit("pauli direction must be a unit vector");
    Mat m(2, 2);
    m << u[2], Cplx(u[0], -u[1]), Cplx(u[0], u[1]), -u[2];
    return {{2}, m};
}

LinOp embed(const LinOp& op, std::size_t subsystem, const Dims& dims) {
    if (subsystem >= dims.size()) throw DimMismatch("subsystem index out of range");
    if (op.mat.rows() != dims[subsystem])
        throw DimMismatch("operator dimension does not match the target factor");
    if (total_dim(dims) > 4096)
        throw DimMismatch("dense representation is capped at total dimension 4096");
    Mat out = Mat::Identity(1, 1);
    for (std::size_t k = 0; k < dims.size(); ++k)
        out = kron(out, k == subsystem ? op.mat : Mat(Mat::Identity(dims[k], dims[k])));
    return {dims, out};
}

Ket basis_ket(const Dims& dims, Eigen::Index index) {
    Vec v = Vec::Zero(total_dim(dims));
    v(index) = 1.0;
    return {dims, v};
}

Ket tensor(const Ket& a, const Ket& b) {
    Dims dims = a.dims;
    dims.insert(dims.end(), b.dims.begin(), b.dims.end());
    return {dims, kron(a.amps, b.amps)};
}

Ket singlet() {
    Vec v = Vec::Zero(4);
    const double r = 1.0 / std::sqrt(2.0);
    v(1) = r;   // |ud>
    v(2) = -r;  // |du>
    return {{2, 2}, v};
}

LinOp swap_gate() {
    Mat m = Mat::Zero(4, 4);
    m(0, 0) = 1;
    m(1, 2) = 1;
    m(2, 1) = 1;
    m(3, 3) = 1;
    return {{2, 2}, m};
}

LinOp singlet_projector() {
    return {{2, 2}, 0.5 * (identity(4) - swap_gate().mat)};
}

LinOp triplet_projector() {
    return {{2, 2}, 0.5 * (identity(4) + swap_gate().mat)};
}

LinOp sigma_total(const Mat& single, const Dims& dims) {
    LinOp s{{2}, single};
    Mat m = embed(s, 0, dims).mat + embed(s, 1, dims).mat;
    return {dims, m};
}

LinOp sigma_total_squared() {
    return {{2, 2}, 4.0 * identity(4) + 4.0 * swap_gate().mat};
}

SpectralDecomp spectral(const LinOp& op) {
    if (!is_hermitian(op.mat, 1e-10)) throw NotHermitian("spectral() needs a hermitian operator");
    Eigen::SelfAdjointEigenSolver<Mat> solver(op.mat);
    const auto& vals = solver.eigenvalues();
    const auto& vecs = solver.eigenvectors();

    const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
    const double group_tol = 1e-8 * scale;

    SpectralDecomp out;
    Eigen::Index i = 0;
    while (i < vals.size()) {
        Eigen::Index j = i;
        while (j + 1 < vals.size() && vals(j + 1) - vals(i) <= group_tol) ++j;
        Mat proj = Mat::Zero(op.mat.rows(), op.mat.cols());
        double mean = 0.0;
        for (Eigen::Index k = i; k <= j; ++k) {
            proj += vecs.col(k) * vecs.col(k).adjoint();
            mean += vals(k);
        }
        mean /= static_cast<double>(j - i + 1);
        out.spaces.push_back({mean, std::move(proj)});
        i = j + 1;
    }
    return out;
}

LinOp partial_trace(const LinOp& rho, std::size_t keep) {
    if (rho.mat.rows() != rho.mat.cols() || rho.mat.rows() != total_dim(rho.dims))
        throw BadDensity("density matrix shape does not match dims");
    if (std::abs(rho.mat.trace().real() - 1.0) > 1e-10 || std::abs(rho.mat.trace().imag()) > 1e-10)
        throw BadDensity("density matrix must have unit trace");
    if (!is_hermitian(rho.mat, 1e-10)) throw BadDensity("density matrix must be hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> solver(rho.mat);
    if (solver.eigenvalues().minCoeff() < -1e-8)
        throw BadDensity("density matrix must be positive semidefinite");
    if (keep >= rho.dims.size()) throw BadDensity("subsystem index out of range");

    const Eigen::Index d_keep = rho.dims[keep];
    Eigen::Index stride = 1;
    for (std::size_t k = keep + 1; k < rho.dims.size(); ++k) stride *= rho.dims[k];
    const Eigen::Index n = total_dim(rho.dims);

    Mat red = Mat::Zero(d_keep, d_keep);
    for (Eigen::Index row = 0; row < n; ++row) {
        const Eigen::Index i = (row / stride) % d_keep;
        const Eigen::Index rest = row - i * stride;
        for (Eigen::Index j = 0; j < d_keep; ++j) {
            const Eigen::Index col = rest + j * stride;
            red(i, j) += rho.mat(row, col);
        }
    }
    return {{d_keep}, red};
}

CommuteReport commutes(const LinOp& a, const LinOp& b) {
    if (a.dims != b.dims || a.mat.rows() != b.mat.rows())
        throw DimMismatch("commutator needs operators on the same space");
    const Mat c = a.mat * b.mat - b.mat * a.mat;
    const double m = c.cwiseAbs().maxCoeff();
    return {m <= 1e-10, m};
}

double fidelity(const Vec& a, const Vec& b) {
    const double na = a.squaredNorm();
    const double nb = b.squaredNorm();
    const Cplx ip = a.dot(b);
    return std::norm(ip) / (na * nb);
}

LinOp exp_hermitian(const LinOp& b, double k) {
    const SpectralDecomp d = spectral(b);
    Mat u = Mat::Zero(b.mat.rows(), b.mat.cols());
    for (const auto& s : d.spaces) u += std::exp(Cplx(0.0, -k * s.eigenvalue)) * s.projector;
    return {b.dims, u};
}

Mat outer(const Vec& v) { return v * v.adjoint(); }

}  // namespace minkqm::hilbert
