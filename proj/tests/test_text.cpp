#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "prodkit/text.hpp"

using namespace prodkit;

TEST_CASE("nfc composes decomposed sequences") {
    // "Cafe" with a combining acute on the e, vs the precomposed form.
    std::string decomposed = "Cafe\xcc\x81";
    std::string precomposed = "Caf\xc3\xa9";
    CHECK(text::nfc(decomposed) == precomposed);
    CHECK(text::nfc(precomposed) == precomposed);
    CHECK(text::nfc("") == "");
}

TEST_CASE("trim and whitespace collapse") {
    CHECK(text::trim("  hello  ") == "hello");
    CHECK(text::trim("\t\n") == "");
    CHECK(text::trim("x") == "x");
    CHECK(text::collapse_whitespace("  a   b \t c ") == "a b c");
    CHECK(text::collapse_whitespace("") == "");
    CHECK(text::is_blank("   \t"));
    CHECK_FALSE(text::is_blank(" a "));
}

TEST_CASE("tokenize folds case and drops punctuation") {
    CHECK(text::tokenize("") == std::vector<std::string>{});
    CHECK(text::tokenize("The Cat, sat!") == std::vector<std::string>{"the", "cat", "sat"});
    CHECK(text::tokenize("Bluetooth 5.3") == std::vector<std::string>{"bluetooth", "5", "3"});
    CHECK(text::tokenize("CAFE cafe Caf\xc3\xa9") ==
          std::vector<std::string>{"cafe", "cafe", "caf\xc3\xa9"});
}

TEST_CASE("phrase matching is case-insensitive and word-bounded") {
    CHECK(text::contains_phrase("Red Silk Scarf", "red"));
    CHECK(text::contains_phrase("Red Silk Scarf", "Silk Scarf"));
    CHECK_FALSE(text::contains_phrase("Redder Silk", "Red"));       // boundary on the right
    CHECK_FALSE(text::contains_phrase("InfraRed Silk", "Red"));     // boundary on the left
    CHECK(text::contains_phrase("Bluetooth 5.3 True Wireless", "5.3"));
    CHECK_FALSE(text::contains_phrase("V5.30 engine", "5.3"));
    CHECK_FALSE(text::contains_phrase("anything", ""));
}

TEST_CASE("contains_fold is plain substring") {
    CHECK(text::contains_fold("Redder", "red"));
    CHECK(text::contains_fold("has Android inside", "android"));
    CHECK_FALSE(text::contains_fold("nothing here", "android"));
}

TEST_CASE("remove_phrases removes every occurrence and renormalizes") {
    std::vector<std::string> phrases{"Red"};
    CHECK(text::remove_phrases("Red Silk Scarf", phrases) == "Silk Scarf");

    std::vector<std::string> multi{"SoundPEATS", "True Wireless", "5.3", "Bluetooth"};
    CHECK(text::remove_phrases(
              "SoundPEATS Clear Transparent Series Bluetooth 5.3 True Wireless Earbuds with Dual "
              "ENC Mic, Gaming Mode, App Support, 40H",
              multi) ==
          "Clear Transparent Series Earbuds with Dual ENC Mic, Gaming Mode, App Support, 40H");

    std::vector<std::string> repeated{"red"};
    CHECK(text::remove_phrases("Red hat red shoes RED socks", repeated) == "hat shoes socks");
}
