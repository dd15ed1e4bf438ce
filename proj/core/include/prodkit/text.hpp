#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prodkit::text {

/// Identifier of the default tokenization rule, recorded in every metric
/// report so scores can be reproduced.
inline constexpr std::string_view kTokenizerRuleId = "nfc-simplefold-alnum/1";

/// Canonical composition (NFC). Ill-formed bytes are substituted.
std::string nfc(std::string_view s);

/// Per-codepoint simple case fold, encoded back to UTF-8.
std::string fold(std::string_view s);

/// Strips Unicode whitespace from both ends.
std::string trim(std::string_view s);

/// Trims and collapses internal whitespace runs to a single ASCII space.
std::string collapse_whitespace(std::string_view s);

/// True when the string is empty or whitespace-only.
bool is_blank(std::string_view s);

/// Default tokenizer: NFC, simple case fold, then maximal alphanumeric runs.
/// Everything else (punctuation, whitespace, symbols) separates tokens and is
/// dropped. tokenize("") == {}.
std::vector<std::string> tokenize(std::string_view s);

struct ByteRange {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
};

/// Case-insensitive word-boundary occurrences of `phrase` in `haystack`,
/// left to right, non-overlapping. A boundary means the neighbouring
/// codepoint (if any) is not alphanumeric. Multi-codepoint phrases are
/// matched as one contiguous sequence. Inputs are expected to be NFC.
std::vector<ByteRange> find_phrase(std::string_view haystack, std::string_view phrase);

bool contains_phrase(std::string_view haystack, std::string_view phrase);

/// Case-insensitive substring containment with no boundary requirement.
bool contains_fold(std::string_view haystack, std::string_view needle);

/// Deletes every word-boundary occurrence of each phrase (in the given
/// order), then re-normalizes whitespace. This is the caption-completion
/// keyword removal rule.
std::string remove_phrases(std::string_view s, std::span<const std::string> phrases);

}  // namespace prodkit::text
