#include <doctest.h>

#include "../invariants.hpp"

TEST_SUITE("invariants") {
  TEST_CASE("Loewdin Gram identity") {
    const auto c = fnls::invariants::loewdin_gram_identity();
    INFO(c.detail << " value " << c.value);
    CHECK(c.pass);
  }
}
