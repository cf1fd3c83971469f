#pragma once

#include <span>
#include <string_view>

namespace metalens {

/// Tables shipped with the tool, compiled into the binary.
struct Fixture {
  std::string_view name;
  std::string_view description;
  std::string_view content;
};

std::span<const Fixture> fixtures();

/// nullptr when no fixture has that file name.
const Fixture* find_fixture(std::string_view name);

}  // namespace metalens
