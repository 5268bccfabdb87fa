#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "test_support.hpp"

int main(int argc, char** argv) {
    etsim::set_warning_handler(&etsim_test::quiet_handler);
    return doctest::Context(argc, argv).run();
}
