#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"
#include "pulsestab/log.hpp"

int main(int argc, char** argv) {
  pulsestab::set_warning_sink(nullptr);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
