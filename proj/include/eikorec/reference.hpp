#ifndef EIKOREC_REFERENCE_HPP
#define EIKOREC_REFERENCE_HPP

#include "eikorec/fem.hpp"

namespace eikorec::ref {

// Serial element-loop assembly, kept as the reference for the OpenMP
// two-phase kernels. Contributions accumulate per row in ascending element
// order, so results are bit-identical to the parallel versions.
SparseMatrix assemble_stiffness(const Mesh& mesh, const PhysicsParams& params);
SparseMatrix assemble_linearized_operator(const NodalField& T, const PhysicsParams& params);
std::vector<double> eikonal_residual(const NodalField& T, const PhysicsParams& params,
                                     const DirichletMap& dirichlet, const NodalField& rhs);

} // namespace eikorec::ref

#endif
