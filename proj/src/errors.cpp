#include "paramest/errors.hpp"

namespace paramest {

namespace {
std::string with_position(const std::string& message, int line, int column) {
    if (line <= 0) return message;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
}
}  // namespace

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error(with_position(message, line, column)), line_(line), column_(column) {}

RankDeficiencyError::RankDeficiencyError(const std::string& message, int rank, int needed)
    : std::runtime_error(message), rank_(rank), needed_(needed) {}

IntegrationError::IntegrationError(const std::string& message, double last_good_time)
    : std::runtime_error(message), last_good_time_(last_good_time) {}

}  // namespace paramest
