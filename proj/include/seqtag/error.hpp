#ifndef SEQTAG_ERROR_HPP_
#define SEQTAG_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace seqtag {

enum class ErrorKind {
  kArgument,    // caller passed an out-of-range or inconsistent argument
  kParse,       // malformed input text
  kValidation,  // well-formed input that violates a domain rule
  kFormat,      // embedding/model file layout problem
  kConfig,      // bad configuration key or value
  kNumeric,     // non-finite value during training
  kIo,          // file could not be opened/written
  kIntegrity,   // checksum mismatch or truncated file
  kVersion,     // unsupported checkpoint version
  kContract,    // precondition of an operation not met
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace seqtag

#endif  // SEQTAG_ERROR_HPP_
