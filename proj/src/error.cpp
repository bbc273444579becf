#include "mpst/error.hpp"

namespace mpst {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UndefinedName: return "UndefinedName";
    case ErrorKind::UnguardedRecursion: return "UnguardedRecursion";
    case ErrorKind::DuplicateBranchLabel: return "DuplicateBranchLabel";
    case ErrorKind::EmptyChoice: return "EmptyChoice";
    case ErrorKind::DuplicateDefinition: return "DuplicateDefinition";
    case ErrorKind::InvalidTerm: return "InvalidTerm";
    case ErrorKind::StateLimitExceeded: return "StateLimitExceeded";
    case ErrorKind::BudgetExhausted: return "BudgetExhausted";
  }
  return "Unknown";
}

static std::string format_error(ErrorKind kind, const std::string& message,
                                SourcePos pos) {
  std::string out;
  if (pos.valid())
    out += std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": ";
  out += std::string(to_string(kind)) + ": " + message;
  return out;
}

Error::Error(ErrorKind kind, const std::string& message, SourcePos pos)
    : std::runtime_error(format_error(kind, message, pos)),
      kind_(kind),
      pos_(pos),
      message_(message) {}

}  // namespace mpst
