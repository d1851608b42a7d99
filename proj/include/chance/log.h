#pragma once

#include <string>

namespace chance {

// Non-fatal conditions (fallbacks, skipped rows) go to stderr unless muted.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace chance
