#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace buyerlearn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ErrorCode {
    InvalidArgument,
    ZeroDirection,
    CutTooShallow,
    EmptyIntersection,
    DimensionTooSmall,
    NotPositiveDefinite,
    UnrealisticPrice,
    SolverFailure,
    NegativeBundle,
    ProjectionFailure,
    DegeneratePriceSpace,
    BetaOutOfRange,
    InfeasibleBudget,
    InfeasibleParameters,
    IterationCapExceeded,
    GridTooLarge,
    IoFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace buyerlearn
