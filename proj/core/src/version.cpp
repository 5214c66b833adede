#include "lastiter/version.hpp"

namespace lastiter {

std::string_view version() noexcept { return LASTITER_VERSION_STRING; }

}  // namespace lastiter
