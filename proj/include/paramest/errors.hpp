#pragma once

#include <stdexcept>
#include <string>

namespace paramest {

/// Syntax or validation failure in a model or data file. Line and column are
/// 1-based; zero means "not attributable to a position".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, int line = 0, int column = 0);
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// A model violates a structural invariant (undeclared symbol, missing equation, ...).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A rational expression or interpolant was evaluated at a pole.
class PoleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// square_system could not reach a Jacobian of full column rank.
class RankDeficiencyError : public std::runtime_error {
public:
    RankDeficiencyError(const std::string& message, int rank, int needed);
    int rank() const noexcept { return rank_; }
    int needed() const noexcept { return needed_; }

private:
    int rank_;
    int needed_;
};

/// Numerical integration stopped early (pole, non-finite state, step underflow).
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& message, double last_good_time);
    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AssessmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace paramest
