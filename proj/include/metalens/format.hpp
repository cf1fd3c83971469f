#pragma once

#include <string>

// Locale-independent number formatting shared by the CSV, SVG and report
// writers. Everything goes through std::to_chars.
namespace metalens::fmt {

/// %g-style with `digits` significant digits.
std::string significant(double value, int digits = 6);

/// Fixed notation with `decimals` places.
std::string fixed(double value, int decimals);

/// Scientific notation with `digits` significant digits, e.g. 1.03e-05.
std::string scientific(double value, int digits = 3);

/// Table convention: 4 decimals when |value| >= 1e-4 (or zero), otherwise
/// scientific with 3 significant digits.
std::string table_number(double value);

}  // namespace metalens::fmt
