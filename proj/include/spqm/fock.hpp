#pragma once

#include <complex>

#include <Eigen/Dense>

namespace spqm {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Dense operator on the truncated number basis |0>,...,|dim-1>.
using FockOperator = CMatrix;

/// \brief Ladder and quadrature operators at truncation dimension dim.
struct CanonicalOperators {
    FockOperator a;
    FockOperator a_dag;
    FockOperator Q;   ///< (a + a†)/√2
    FockOperator P;   ///< −i(a − a†)/√2
    FockOperator Ho;  ///< a†a + 1/2
};

CanonicalOperators canonical_operators(int dim);

/// \brief D_α = exp(a†α − aα*) computed in the truncated space.
FockOperator displacement_operator(int dim, cplx alpha);

/// \brief Top-left rows×cols block of the untruncated D_α.
///
/// Column k is (a† − α*)^k |α⟩/√k!, and row m of that vector only involves rows ≤ m
/// of the exact coherent state, so the block carries no truncation error.
CMatrix displacement_block(int rows, int cols, cplx alpha);

/// \brief Padé-13 scaling-and-squaring exponential (degree chosen from the 1-norm).
FockOperator matrix_exponential(const FockOperator& X);

/// Size of the top-left block used for truncation-tolerant comparisons: ⌈dim/2⌉.
int interior_size(int dim);

/// Top-left ⌈dim/2⌉ block of X.
FockOperator interior_block(const FockOperator& X);

/// Operator (spectral) 2-norm.
double operator_norm(const CMatrix& X);

/// Frobenius norm of the top-left ⌈dim/2⌉ block.
double interior_norm(const FockOperator& X);

/// Coherent state D_α|0> in the truncated space.
CVector coherent_state(int dim, cplx alpha);

}  // namespace spqm
