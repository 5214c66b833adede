#pragma once

#include <string_view>

namespace lastiter {

/// Library version, also written into every report.
std::string_view version() noexcept;

}  // namespace lastiter
