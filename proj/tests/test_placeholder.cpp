#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "m3pipe/backends.hpp"
#include "m3pipe/errors.hpp"
#include "m3pipe/placeholder.hpp"
#include "support/test_util.hpp"

using namespace m3pipe;
using m3pipe::test::TextGen;

TEST_CASE("single literal pattern") {
  auto [masked, map] = protect("<image>\nWhat is this?", {"<image>"});
  CHECK(masked == "⟦PH0⟧\nWhat is this?");
  REQUIRE(map.size() == 1);
  CHECK(map.entries[0].first == "⟦PH0⟧");
  CHECK(map.entries[0].second == "<image>");
  CHECK(restore(masked, map) == "<image>\nWhat is this?");
}

TEST_CASE("no pattern matches: identity text, empty map") {
  auto [masked, map] = protect("plain text", {"<image>"});
  CHECK(masked == "plain text");
  CHECK(map.empty());
  CHECK(restore(masked, map) == "plain text");
}

TEST_CASE("two tokens are numbered left to right") {
  std::string text = "<image> and <image> again";
  auto [masked, map] = protect(text, {"<image>"});
  CHECK(masked == "⟦PH0⟧ and ⟦PH1⟧ again");
  REQUIRE(map.size() == 2);
  CHECK(restore(masked, map) == text);
}

TEST_CASE("input containing the sentinel prefix is rejected") {
  CHECK_THROWS_AS(protect("evil ⟦PH0⟧ input", {"<image>"}), ValidationError);
  CHECK_THROWS_AS(protect("⟦PH", {}), ValidationError);
}

TEST_CASE("patterns without a literal character are rejected") {
  CHECK_THROWS_AS(protect("x", {"*"}), ValidationError);
  CHECK_THROWS_AS(protect("x", {"**"}), ValidationError);
}

TEST_CASE("wildcard pattern protects bracketed tokens") {
  auto [masked, map] = protect("a ⟦note⟧ b ⟦x1⟧ c",
                               default_placeholder_patterns());
  CHECK(masked == "a ⟦PH0⟧ b ⟦PH1⟧ c");
  REQUIRE(map.size() == 2);
  CHECK(map.entries[0].second == "⟦note⟧");
  CHECK(map.entries[1].second == "⟦x1⟧");
  CHECK(restore(masked, map) == "a ⟦note⟧ b ⟦x1⟧ c");
}

TEST_CASE("longest pattern wins at a position") {
  auto [masked, map] = protect("<ImageHere>", {"<Img>", "<ImageHere>"});
  REQUIRE(map.size() == 1);
  CHECK(map.entries[0].second == "<ImageHere>");
}

TEST_CASE("restore keys on the digit skeleton, surviving letter rewrites") {
  auto [masked, map] = protect("<image> a cat", {"<image>"});
  // a backend that rotates letters turns PH into RJ; digits and brackets stay
  std::string rotated = mock_translate_text(masked, Lang::en, Lang::zh);
  CHECK(rotated.find("⟦0⟧") == std::string::npos);  // letters still there
  std::string restored = restore(rotated, map);
  CHECK(restored.find("<image>") == 0);

  // uppercase mangling keeps sentinels verbatim
  std::string upper = UppercaseTranslationBackend().translate({masked}, Lang::en, Lang::zh)[0];
  CHECK(restore(upper, map) == "<image> A CAT");
}

TEST_CASE("lost, duplicated, or invented sentinels are errors") {
  auto [masked, map] = protect("<image> x <image>", {"<image>"});
  CHECK_THROWS_AS(restore("no sentinels here", map), ValidationError);
  CHECK_THROWS_AS(restore("⟦PH0⟧ ⟦PH0⟧ ⟦PH1⟧", map),
                  ValidationError);
  CHECK_THROWS_AS(restore("⟦PH0⟧ ⟦PH1⟧ ⟦PH7⟧", map),
                  ValidationError);
}

TEST_CASE("incomplete skeletons pass through literally") {
  PlaceholderMap empty_map;
  CHECK(restore("a ⟦ b", empty_map) == "a ⟦ b");
  CHECK(restore("a ⟦abc⟧ b", empty_map) == "a ⟦abc⟧ b");
}

TEST_CASE("randomized protect/restore round trip") {
  TextGen gen(21);
  std::vector<std::string> patterns = default_placeholder_patterns();
  for (int i = 0; i < 500; ++i) {
    std::string text;
    int pieces = 1 + static_cast<int>(gen.next() % 5);
    for (int p = 0; p < pieces; ++p) {
      switch (gen.next() % 4) {
        case 0: text += "<image>"; break;
        case 1: text += "<Img>inner</Img>"; break;
        case 2: text += "⟦tok" + std::to_string(gen.next() % 10) + "⟧"; break;
        default: text += gen.sentence(0, 6); break;
      }
      text.push_back(' ');
    }
    auto [masked, map] = protect(text, patterns);
    CHECK(restore(masked, map) == text);
    // protected substrings never appear in the masked text
    CHECK(masked.find("<image>") == std::string::npos);
    CHECK(masked.find("<Img>") == std::string::npos);
  }
}

TEST_CASE("placeholder multiset is conserved through a mangling backend") {
  TextGen gen(33);
  LetterMangleTranslationBackend mangle;
  for (int i = 0; i < 200; ++i) {
    int tokens = 1 + static_cast<int>(gen.next() % 4);
    std::string text;
    for (int t = 0; t < tokens; ++t) text += gen.sentence(0, 4) + " <image> ";
    auto [masked, map] = protect(text, {"<image>"});
    std::string mangled = mangle.translate({masked}, Lang::en, Lang::zh)[0];
    std::string restored = restore(mangled, map);
    std::size_t count = 0, pos = 0;
    while ((pos = restored.find("<image>", pos)) != std::string::npos) {
      ++count;
      pos += 7;
    }
    CHECK(count == static_cast<std::size_t>(tokens));
  }
}
