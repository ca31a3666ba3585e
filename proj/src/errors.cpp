#include "plkit/errors.hpp"

#include <utility>

namespace plkit {
namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::string msg = "validation failed";
  const char* sep = ": ";
  for (const auto& v : violations) {
    msg += sep;
    msg += v;
    sep = "; ";
  }
  return msg;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)),
      violations_(std::move(violations)) {}

}  // namespace plkit
