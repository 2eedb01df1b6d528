#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fedleak {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using NodeId = int;

// Thrown for violated preconditions and malformed inputs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A run left the region where the protocol is expected to converge.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(what);
}

}  // namespace fedleak
