#pragma once

#include <functional>
#include <string>

namespace pulsestab {

using WarningSink = std::function<void(const std::string&)>;

// Replace the warning sink (default writes to stderr). Returns the previous one.
WarningSink set_warning_sink(WarningSink sink);

void warn(const std::string& message);

}  // namespace pulsestab
