#pragma once

#include <functional>
#include <string_view>

namespace bees {

using WarningHandler = std::function<void(std::string_view)>;

// Replaces the process-wide warning sink and returns the previous one.
// The default handler writes "bees: warning: ..." to stderr; an empty
// handler silences warnings.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

}  // namespace bees
