#include "cloakbench/sym_tensor.hpp"

#include <Eigen/Eigenvalues>

namespace cloakbench {

std::array<double, 3> SymTensor3::eigenvalues() const {
  Eigen::Matrix3d m;
  m << xx, xy, xz, xy, yy, yz, xz, yz, zz;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev[0], ev[1], ev[2]};
}

}  // namespace cloakbench
