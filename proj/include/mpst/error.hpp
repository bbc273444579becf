#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpst {

enum class ErrorKind {
  SyntaxError,
  UndefinedName,
  UnguardedRecursion,
  DuplicateBranchLabel,
  EmptyChoice,
  DuplicateDefinition,
  InvalidTerm,
  StateLimitExceeded,
  BudgetExhausted,
};

std::string_view to_string(ErrorKind kind);

struct SourcePos {
  int line = 0;
  int column = 0;

  bool valid() const { return line > 0; }
};

/// Library-wide exception. Frontend errors carry the source position of the
/// offending token; errors raised on programmatically built terms do not.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, SourcePos pos = {});

  ErrorKind kind() const { return kind_; }
  SourcePos pos() const { return pos_; }
  const std::string& message() const { return message_; }

 private:
  ErrorKind kind_;
  SourcePos pos_;
  std::string message_;
};

}  // namespace mpst
