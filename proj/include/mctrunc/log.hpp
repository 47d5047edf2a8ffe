#pragma once

#include <functional>
#include <string>

namespace mctrunc {

/// Warnings are written to stderr unless a sink is installed.
using LogSink = std::function<void(const std::string&)>;

void set_log_sink(LogSink sink);
void log_warning(const std::string& message);

}  // namespace mctrunc
