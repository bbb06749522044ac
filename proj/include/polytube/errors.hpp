#pragma once

#include <stdexcept>
#include <string>

namespace polytube {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct EmptyPolytope : Error { using Error::Error; };
struct UnboundedPolytope : Error { using Error::Error; };
struct NoInteriorPoint : Error { using Error::Error; };
struct DegenerateVertex : Error { using Error::Error; };
struct PartitionMismatch : Error { using Error::Error; };
struct ConeViolation : Error { using Error::Error; };
struct EmptyEnsemble : Error { using Error::Error; };
struct TemplateMismatch : Error { using Error::Error; };
struct EmptyInformationSet : Error { using Error::Error; };
struct InfeasibleWeights : Error { using Error::Error; };
struct NumericalBreakdown : Error { using Error::Error; };
struct ScenarioError : Error { using Error::Error; };

}  // namespace polytube
