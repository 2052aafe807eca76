#include "tca/doc_value.hpp"

#include "doctest.h"
#include "support/random_docs.hpp"

using namespace tca;
using namespace tca::testing;

TEST_CASE("scalar depth is zero") {
  CHECK(measure_depth(DocValue::integer(5)) == 0);
  CHECK(measure_depth(DocValue::null()) == 0);
  CHECK(measure_depth(DocValue::str("deep-looking [[[ string")) == 0);
}

TEST_CASE("single level containers") {
  CHECK(measure_depth(mapv({{"a", DocValue::integer(1)}})) == 1);
  CHECK(measure_depth(DocValue::array({})) == 1);
  CHECK(measure_depth(DocValue::map({})) == 1);
}

TEST_CASE("nested depth counts every container level") {
  DocValue inner = DocValue::array({DocValue::integer(1)});
  DocValue middle = mapv({{"x", inner}});
  DocValue outer = DocValue::array({middle, DocValue::integer(7)});
  CHECK(measure_depth(outer) == 3);
}

TEST_CASE("depth agrees with the recursive oracle on randomized documents") {
  Rng rng(0xD0C5EED);
  int checked = 0;
  for (int i = 0; i < 700; ++i) {
    DocValue doc = random_doc(rng, 1 + static_cast<uint32_t>(rng.below(9)), 8);
    CHECK(measure_depth(doc) == oracle_depth(doc));
    CHECK(node_count(doc) == oracle_node_count(doc));
    ++checked;
  }
  for (int i = 0; i < 300; ++i) {
    uint32_t depth = static_cast<uint32_t>(rng.below(301));
    DocValue doc = chain_doc(rng, depth);
    CHECK(measure_depth(doc) == depth);
    CHECK(measure_depth(doc) == oracle_depth(doc));
    ++checked;
  }
  CHECK(checked >= 1000);
}

TEST_CASE("duplicate map keys are rejected at construction") {
  DocValue::Map entries;
  entries.push_back({"a", DocValue::integer(1)});
  entries.push_back({"a", DocValue::integer(2)});
  CHECK_THROWS_AS(DocValue::map(std::move(entries)), std::invalid_argument);
}

TEST_CASE("structural equality") {
  Rng rng(42);
  for (int i = 0; i < 50; ++i) {
    DocValue doc = random_doc(rng, 6, 6);
    DocValue copy = doc;
    CHECK(doc == copy);
  }
  CHECK(mapv({{"a", DocValue::integer(1)}}) != mapv({{"a", DocValue::integer(2)}}));
  CHECK(mapv({{"a", DocValue::integer(1)}}) != mapv({{"b", DocValue::integer(1)}}));
  CHECK(DocValue::integer(1) != DocValue::real(1.0));
  CHECK(DocValue::array({}) != DocValue::map({}));
}

TEST_CASE("map lookup") {
  DocValue doc = mapv({{"a", DocValue::integer(1)}, {"b", DocValue::boolean(true)}});
  REQUIRE(doc.find("b") != nullptr);
  CHECK(doc.find("b")->as_bool());
  CHECK(doc.find("missing") == nullptr);
  CHECK(DocValue::integer(3).find("a") == nullptr);
}
