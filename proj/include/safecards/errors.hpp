#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace safecards {

enum class ErrorCode {
  kParse,
  kSchema,
  kValidation,
  kVersion,
  kConfig,
  kPackRulesetMismatch,
  kNotYourTurn,
  kIllegalMove,
  kWrongPhase,
  kEmptyMoveSet,
  kReplayMismatch,
  kNotFound,
  kUnauthorized,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// One invariant breach found in a content pack or a game state.
struct Violation {
  std::string code;     // machine-readable, e.g. "GAP_IN_RANKS"
  std::string path;     // entry path, e.g. "advice[12]"
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

// All library failures are reported through this type. `rule_code` is set
// for IllegalMove; `violations` for ValidationError.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string rule_code = {},
        std::vector<Violation> violations = {})
      : std::runtime_error(message),
        code_(code),
        rule_code_(std::move(rule_code)),
        violations_(std::move(violations)) {}

  ErrorCode code() const { return code_; }
  const std::string& rule_code() const { return rule_code_; }
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  ErrorCode code_;
  std::string rule_code_;
  std::vector<Violation> violations_;
};

}  // namespace safecards
