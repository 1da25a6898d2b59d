#include "panocalib/errors.hpp"

namespace panocalib {

std::string_view to_string(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::InvalidArgument:
      return "InvalidArgument";
    case ErrorClass::PoleSingularity:
      return "PoleSingularity";
    case ErrorClass::BranchDomain:
      return "BranchDomain";
    case ErrorClass::AllPointsRejected:
      return "AllPointsRejected";
    case ErrorClass::DataError:
      return "DataError";
    case ErrorClass::IoError:
      return "IoError";
    case ErrorClass::NumericalFailure:
      return "NumericalFailure";
  }
  return "Error";
}

}  // namespace panocalib
