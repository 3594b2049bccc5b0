#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecx {

// Every failure raised by the library derives from Error so callers can
// catch the whole family at once; the concrete type names the condition.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ECX_DEFINE_ERROR(Name)            \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

// ingest
ECX_DEFINE_ERROR(IoError);
ECX_DEFINE_ERROR(ShapeError);

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// signal
ECX_DEFINE_ERROR(DegenerateChannel);
ECX_DEFINE_ERROR(TooShort);
ECX_DEFINE_ERROR(BadParams);

// recon
ECX_DEFINE_ERROR(TooFewPoints);
ECX_DEFINE_ERROR(InsufficientSupport);

// complexity
ECX_DEFINE_ERROR(DegenerateFit);

class FTrivialRecord : public Error {
 public:
  explicit FTrivialRecord(const std::string& what, int order = 0)
      : Error(what), order_(order) {}
  // Difference order at which the record became exactly recoverable.
  int order() const noexcept { return order_; }

 private:
  int order_;
};

// classify
ECX_DEFINE_ERROR(DegenerateCohort);
ECX_DEFINE_ERROR(NoOOBVotes);
ECX_DEFINE_ERROR(SchemaMismatch);
ECX_DEFINE_ERROR(EmptyTrain);

// eval
ECX_DEFINE_ERROR(BadK);
ECX_DEFINE_ERROR(ValidationError);

#undef ECX_DEFINE_ERROR

}  // namespace ecx
