#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "hill/log.hpp"

int main(int argc, char** argv) {
  hill::init_logging();
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
