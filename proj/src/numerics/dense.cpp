#include "bha/numerics/dense.hpp"

#include "bha/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <string>

namespace bha {

SymEig dense_eig_sym(const DenseMat& s) {
    if (s.rows() != s.cols())
        throw DimensionMismatch("dense_eig_sym: matrix is not square");
    const Index n = s.rows();
    if (n == 0)
        return {Vec(0), DenseMat(0, 0)};
    const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8 * s.norm())
        throw NonSymmetric("dense_eig_sym: asymmetry " + std::to_string(asym));

    const DenseMat sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<DenseMat> solver(sym);
    if (solver.info() != Eigen::Success)
        throw NonConvergence("dense_eig_sym: symmetric eigensolver failed");
    // Eigen returns ascending order.
    SymEig out{solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
    return out;
}

ThinQr thin_qr(const DenseMat& a) {
    if (a.rows() < a.cols())
        throw DimensionMismatch("thin_qr: requires rows >= cols");
    Eigen::HouseholderQR<DenseMat> qr(a);
    ThinQr out;
    out.q = qr.householderQ() * DenseMat::Identity(a.rows(), a.cols());
    out.r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
    return out;
}

PseudoInverse pseudo_inverse(const DenseMat& a, double rcond) {
    PseudoInverse out;
    out.pinv = DenseMat::Zero(a.cols(), a.rows());
    if (a.size() == 0)
        return out;
    Eigen::BDCSVD<DenseMat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    if (smax <= 0.0)
        return out;
    out.conditioning = sv[sv.size() - 1] / smax;
    const double cutoff = rcond * smax;
    Vec inv = Vec::Zero(sv.size());
    for (Index k = 0; k < sv.size(); ++k) {
        if (sv[k] > cutoff) {
            inv[k] = 1.0 / sv[k];
            ++out.rank;
        }
    }
    out.pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    return out;
}

} // namespace bha
