#pragma once

#include <stdexcept>
#include <string>

namespace avseg {

// Error categories. The CLI maps these onto process exit codes, and the
// file-format readers use them to report distinct failure modes.
enum class Errc {
  validation,        // bad arguments, violated invariants, malformed input
  bad_magic,         // file does not start with the expected magic bytes
  bad_version,       // file version not supported by this reader
  dim_mismatch,      // feature dimensions inconsistent with expectation
  truncated,         // file ended before the declared payload
  trailing_data,     // file has bytes past the declared payload
  missing_artifact,  // a required input file/directory does not exist
  numeric,           // NaN/Inf encountered where finite values are required
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, Errc code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

inline void require_valid(bool cond, const std::string& msg) {
  require(cond, Errc::validation, msg);
}

}  // namespace avseg
