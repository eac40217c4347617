#pragma once

#include <stdexcept>
#include <string>

namespace betaspec {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
  ok = 0,
  input = 2,
  budget = 3,
  schedule_infeasible = 4,
  falsified = 5,
};

class error : public std::runtime_error {
 public:
  error(const std::string& what, ExitCode code) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Argument outside the mathematical domain of an operation (x ∉ [0,1), β ≤ 1).
class domain_error : public error {
 public:
  explicit domain_error(const std::string& what) : error(what, ExitCode::input) {}
};

/// Malformed or contract-violating input (inadmissible word, ε ≤ 0, ...).
class input_error : public error {
 public:
  explicit input_error(const std::string& what) : error(what, ExitCode::input) {}
};

/// Enumeration, memory or precision budget exceeded.
class budget_error : public error {
 public:
  explicit budget_error(const std::string& what) : error(what, ExitCode::budget) {}
};

class schedule_infeasible : public error {
 public:
  explicit schedule_infeasible(const std::string& what) : error(what, ExitCode::schedule_infeasible) {}
};

}  // namespace betaspec
