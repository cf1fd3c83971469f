#pragma once

#include <stdexcept>
#include <string>

namespace metalens {

/// Precondition failure on an operation's numeric or structural inputs.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A single input row failed validation. Carries the row identifier and the
/// offending field so callers can point users at the exact cell.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string row, std::string field, const std::string& message)
      : std::runtime_error(compose(row, field, message)),
        row_(std::move(row)),
        field_(std::move(field)),
        detail_(message) {}

  const std::string& row() const noexcept { return row_; }
  const std::string& field() const noexcept { return field_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  static std::string compose(const std::string& row, const std::string& field,
                             const std::string& message) {
    std::string out = row;
    if (!field.empty()) out += ", field '" + field + "'";
    return out + ": " + message;
  }

  std::string row_;
  std::string field_;
  std::string detail_;
};

}  // namespace metalens
