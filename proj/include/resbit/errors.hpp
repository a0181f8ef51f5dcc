#pragma once

#include <stdexcept>
#include <string>

namespace resbit {

// Base class for every recoverable data error raised by the toolkit. The CLI
// maps these onto exit code 2; anything else escaping is an internal fault.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

#define RESBIT_DEFINE_ERROR(Name, Tag)                              \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(what) {}         \
    const char* kind() const noexcept override { return Tag; }      \
  }

RESBIT_DEFINE_ERROR(DomainError, "domain");
RESBIT_DEFINE_ERROR(RangeError, "range");
RESBIT_DEFINE_ERROR(ShapeError, "shape");
RESBIT_DEFINE_ERROR(MalformedCodeError, "malformed_code");
RESBIT_DEFINE_ERROR(SchemaError, "schema");
RESBIT_DEFINE_ERROR(VocabularyError, "vocabulary");
RESBIT_DEFINE_ERROR(FormatError, "format");
RESBIT_DEFINE_ERROR(IoError, "io");

#undef RESBIT_DEFINE_ERROR

// Invalid diffusion schedule. Kept distinct from DomainError because the CLI
// reports it as a usage problem rather than a data problem.
class ScheduleError : public DomainError {
 public:
  explicit ScheduleError(const std::string& what) : DomainError(what) {}
  const char* kind() const noexcept override { return "schedule"; }
};

}  // namespace resbit
