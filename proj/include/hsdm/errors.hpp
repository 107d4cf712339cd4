#pragma once

#include <stdexcept>
#include <string>

namespace hsdm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HSDM_DEFINE_ERROR(Name)          \
  class Name : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

// graph construction
HSDM_DEFINE_ERROR(DuplicateNameError);
HSDM_DEFINE_ERROR(UnknownNodeSetError);
HSDM_DEFINE_ERROR(IndexOutOfBoundsError);
HSDM_DEFINE_ERROR(DuplicateEdgeError);
HSDM_DEFINE_ERROR(MissingEdgeSetError);

// numerics
HSDM_DEFINE_ERROR(ShapeMismatchError);
HSDM_DEFINE_ERROR(NonFiniteLossError);
HSDM_DEFINE_ERROR(EmptyInputError);
HSDM_DEFINE_ERROR(DegenerateLabelsError);

// sampling / configuration
HSDM_DEFINE_ERROR(InfeasibleRequestError);
HSDM_DEFINE_ERROR(ConfigError);

// files
HSDM_DEFINE_ERROR(IoError);
HSDM_DEFINE_ERROR(CorruptCheckpointError);
HSDM_DEFINE_ERROR(VersionMismatchError);
HSDM_DEFINE_ERROR(MissingColumnError);
HSDM_DEFINE_ERROR(NonNumericFeatureError);
HSDM_DEFINE_ERROR(UnknownSpeciesError);
HSDM_DEFINE_ERROR(InconsistentWidthError);
HSDM_DEFINE_ERROR(UnknownGroupError);

#undef HSDM_DEFINE_ERROR

}  // namespace hsdm
