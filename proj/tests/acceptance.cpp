#include <catch_amalgamated.hpp>
#include "qmb/qmb.hpp"
TEST_CASE("placeholder acceptance") { CHECK(true); }
