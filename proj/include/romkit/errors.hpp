#pragma once

#include <stdexcept>
#include <string>

namespace romkit {

// Base class for every error thrown by this library.  Catching RomError
// at a driver boundary is enough to translate failures into exit codes.
struct RomError : std::runtime_error {
  explicit RomError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : RomError {
  explicit DimensionMismatch(const std::string& msg) : RomError(msg) {}
};

// State vector left the physical regime (nonpositive density or pressure,
// NaN/Inf entries) so a flux evaluation cannot proceed.
struct NonPhysicalState : RomError {
  explicit NonPhysicalState(const std::string& msg) : RomError(msg) {}
};

struct InvalidArgument : RomError {
  explicit InvalidArgument(const std::string& msg) : RomError(msg) {}
};

struct EmptySnapshots : RomError {
  explicit EmptySnapshots(const std::string& msg) : RomError(msg) {}
};

struct InvalidCriterion : RomError {
  explicit InvalidCriterion(const std::string& msg) : RomError(msg) {}
};

struct OverlappingBlocks : RomError {
  explicit OverlappingBlocks(const std::string& msg) : RomError(msg) {}
};

struct NonOrthonormalBlock : RomError {
  explicit NonOrthonormalBlock(const std::string& msg) : RomError(msg) {}
};

struct SingularJacobian : RomError {
  explicit SingularJacobian(const std::string& msg) : RomError(msg) {}
};

struct DenseJacobianUnavailable : RomError {
  explicit DenseJacobianUnavailable(const std::string& msg) : RomError(msg) {}
};

struct RankDeficientNormalEquations : RomError {
  explicit RankDeficientNormalEquations(const std::string& msg) : RomError(msg) {}
};

struct ZeroSpectralRadius : RomError {
  explicit ZeroSpectralRadius(const std::string& msg) : RomError(msg) {}
};

struct RankDeficientSampling : RomError {
  explicit RankDeficientSampling(const std::string& msg) : RomError(msg) {}
};

struct TimeGridMismatch : RomError {
  explicit TimeGridMismatch(const std::string& msg) : RomError(msg) {}
};

struct AllRunsUnstable : RomError {
  explicit AllRunsUnstable(const std::string& msg) : RomError(msg) {}
};

struct NonDiagonalizable : RomError {
  explicit NonDiagonalizable(const std::string& msg) : RomError(msg) {}
};

struct AssumptionViolated : RomError {
  explicit AssumptionViolated(const std::string& msg) : RomError(msg) {}
};

struct QuadratureNotConverged : RomError {
  explicit QuadratureNotConverged(const std::string& msg) : RomError(msg) {}
};

struct InvalidWindow : RomError {
  explicit InvalidWindow(const std::string& msg) : RomError(msg) {}
};

struct GmresBreakdown : RomError {
  explicit GmresBreakdown(const std::string& msg) : RomError(msg) {}
};

struct ConfigError : RomError {
  explicit ConfigError(const std::string& msg) : RomError(msg) {}
};

struct MissingArtifact : RomError {
  explicit MissingArtifact(const std::string& msg) : RomError(msg) {}
};

struct SolverFailure : RomError {
  explicit SolverFailure(const std::string& msg) : RomError(msg) {}
};

}  // namespace romkit
