#pragma once

#include <stdexcept>
#include <string>

namespace spectral_lab {

enum class ErrorKind {
  invalid_argument,  // bad parameter, malformed input
  not_found,         // unknown vertex/edge id, missing file
  invalid_graph,     // graph fails a structural precondition
  numerical,         // factorization failure, non-convergence
  capacity,          // size cap exceeded
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string subject = {})
      : std::runtime_error(message), kind_(kind), subject_(std::move(subject)) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Offending path/id when there is one (e.g. the missing file).
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorKind kind_;
  std::string subject_;
};

}  // namespace spectral_lab
