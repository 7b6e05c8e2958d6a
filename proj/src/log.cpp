#include "pulsestab/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace pulsestab {

namespace {

std::mutex g_sink_mutex;

WarningSink& sink_ref() {
  static WarningSink sink = [](const std::string& m) { std::cerr << "warning: " << m << "\n"; };
  return sink;
}

}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard<std::mutex> lock(g_sink_mutex);
  std::swap(sink_ref(), sink);
  return sink;
}

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(g_sink_mutex);
  if (sink_ref()) sink_ref()(message);
}

}  // namespace pulsestab
