#pragma once

#include <complex>

#include <Eigen/Dense>

namespace cisim {

using cplx = std::complex<double>;

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

}
