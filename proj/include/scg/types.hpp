#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace scg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using cplx = std::complex<double>;

struct PhasePoint {
    Vec x;
    Vec p;
};

// Numerical breakdown: budget exhausted, step collapse, caustic where a regular point was required.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CausticError : public NumericError {
public:
    using NumericError::NumericError;
};

// A geometric hypothesis of the construction fails (trapping, transversality, compactness).
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Multiply by (-i)^k without rounding: quarter turns only permute and negate components.
inline cplx quarter_turns(cplx z, int k)
{
    switch (((k % 4) + 4) % 4) {
    case 1: return {z.imag(), -z.real()};
    case 2: return {-z.real(), -z.imag()};
    case 3: return {-z.imag(), z.real()};
    default: return z;
    }
}

}  // namespace scg
