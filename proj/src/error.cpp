#include "podlab/error.hpp"

#include <atomic>
#include <cstdio>

namespace podlab {

namespace {

void stderr_sink(const char* message, void* /*context*/) {
  std::fprintf(stderr, "warning: %s\n", message);
}

std::atomic<WarningSink> g_sink{stderr_sink};
std::atomic<void*> g_context{nullptr};

}  // namespace

void set_warning_sink(WarningSink sink, void* context) {
  g_context.store(context);
  g_sink.store(sink ? sink : stderr_sink);
}

void warn(const std::string& message) {
  g_sink.load()(message.c_str(), g_context.load());
}

}  // namespace podlab
