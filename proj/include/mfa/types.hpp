#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mfa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Requested parameters cannot be satisfied by the data (e.g. fewer graph
/// components than target clusters). Maps to a distinct CLI exit code.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mfa
