#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>

namespace floq {

using Real = double;
using Complex = std::complex<Real>;
using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr Real kPi = 3.14159265358979323846264338327950288;

/// Per-thread cap on the number of OpenMP threads the dense kernels may use.
/// Sweep worker pools lower this so that concurrently evolving grid points do
/// not oversubscribe the machine; 0 means "use the OpenMP default".
int kernel_threads();
void set_kernel_threads(int n);
int hardware_threads();

}  // namespace floq
