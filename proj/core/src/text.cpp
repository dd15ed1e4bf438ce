#include "prodkit/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <stdexcept>

namespace prodkit::text {

namespace {

struct Codepoint {
    UChar32 value;
    std::size_t offset;  // byte offset of the codepoint's first byte
};

std::vector<Codepoint> decode(std::string_view s) {
    std::vector<Codepoint> out;
    out.reserve(s.size());
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(s.data());
    std::int32_t i = 0;
    const auto len = static_cast<std::int32_t>(s.size());
    while (i < len) {
        std::int32_t start = i;
        UChar32 c;
        U8_NEXT(bytes, i, len, c);
        if (c < 0) c = 0xFFFD;
        out.push_back({c, static_cast<std::size_t>(start)});
    }
    return out;
}

void append_utf8(std::string& out, UChar32 c) {
    char buf[U8_MAX_LENGTH];
    std::int32_t n = 0;
    UBool err = false;
    U8_APPEND(reinterpret_cast<std::uint8_t*>(buf), n, U8_MAX_LENGTH, c, err);
    if (!err) out.append(buf, static_cast<std::size_t>(n));
}

bool is_word_char(UChar32 c) { return u_isalnum(c); }

const icu::Normalizer2& nfc_instance() {
    UErrorCode ec = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(ec);
    if (U_FAILURE(ec) || n == nullptr) {
        throw std::runtime_error("ICU NFC normalizer unavailable");
    }
    return *n;
}

// Folded codepoints of `s` together with the byte range each one came from.
struct FoldedView {
    std::vector<UChar32> folded;
    std::vector<std::size_t> offsets;  // offsets.size() == folded.size() + 1
};

FoldedView fold_view(std::string_view s) {
    FoldedView v;
    auto cps = decode(s);
    v.folded.reserve(cps.size());
    v.offsets.reserve(cps.size() + 1);
    for (const auto& cp : cps) {
        v.folded.push_back(u_foldCase(cp.value, U_FOLD_CASE_DEFAULT));
        v.offsets.push_back(cp.offset);
    }
    v.offsets.push_back(s.size());
    return v;
}

}  // namespace

std::string nfc(std::string_view s) {
    if (s.empty()) return {};
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<std::int32_t>(s.size())));
    UErrorCode ec = U_ZERO_ERROR;
    icu::UnicodeString norm = nfc_instance().normalize(u, ec);
    if (U_FAILURE(ec)) throw std::runtime_error("NFC normalization failed");
    std::string out;
    norm.toUTF8String(out);
    return out;
}

std::string fold(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (const auto& cp : decode(s)) {
        append_utf8(out, u_foldCase(cp.value, U_FOLD_CASE_DEFAULT));
    }
    return out;
}

std::string trim(std::string_view s) {
    auto cps = decode(s);
    std::size_t b = 0, e = cps.size();
    while (b < e && u_isUWhiteSpace(cps[b].value)) ++b;
    while (e > b && u_isUWhiteSpace(cps[e - 1].value)) --e;
    if (b == e) return {};
    std::size_t from = cps[b].offset;
    std::size_t to = (e < cps.size()) ? cps[e].offset : s.size();
    return std::string(s.substr(from, to - from));
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    bool seen_content = false;
    for (const auto& cp : decode(s)) {
        if (u_isUWhiteSpace(cp.value)) {
            pending_space = seen_content;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        append_utf8(out, cp.value);
        seen_content = true;
    }
    return out;
}

bool is_blank(std::string_view s) {
    for (const auto& cp : decode(s)) {
        if (!u_isUWhiteSpace(cp.value)) return false;
    }
    return true;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string norm = nfc(s);
    std::string current;
    for (const auto& cp : decode(norm)) {
        UChar32 f = u_foldCase(cp.value, U_FOLD_CASE_DEFAULT);
        if (is_word_char(f)) {
            append_utf8(current, f);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<ByteRange> find_phrase(std::string_view haystack, std::string_view phrase) {
    std::vector<ByteRange> matches;
    FoldedView hay = fold_view(haystack);
    FoldedView needle = fold_view(phrase);
    if (needle.folded.empty() || needle.folded.size() > hay.folded.size()) return matches;

    const std::size_t n = hay.folded.size();
    const std::size_t m = needle.folded.size();
    std::size_t i = 0;
    while (i + m <= n) {
        bool eq = std::equal(needle.folded.begin(), needle.folded.end(), hay.folded.begin() + static_cast<std::ptrdiff_t>(i));
        if (eq) {
            bool left_ok = (i == 0) || !is_word_char(hay.folded[i - 1]);
            bool right_ok = (i + m == n) || !is_word_char(hay.folded[i + m]);
            if (left_ok && right_ok) {
                matches.push_back({hay.offsets[i], hay.offsets[i + m]});
                i += m;  // non-overlapping
                continue;
            }
        }
        ++i;
    }
    return matches;
}

bool contains_phrase(std::string_view haystack, std::string_view phrase) {
    return !find_phrase(haystack, phrase).empty();
}

bool contains_fold(std::string_view haystack, std::string_view needle) {
    FoldedView hay = fold_view(haystack);
    FoldedView n = fold_view(needle);
    if (n.folded.empty()) return true;
    auto it = std::search(hay.folded.begin(), hay.folded.end(), n.folded.begin(), n.folded.end());
    return it != hay.folded.end();
}

std::string remove_phrases(std::string_view s, std::span<const std::string> phrases) {
    std::string work(s);
    for (const auto& phrase : phrases) {
        if (is_blank(phrase)) continue;
        auto matches = find_phrase(work, phrase);
        if (matches.empty()) continue;
        std::string next;
        next.reserve(work.size());
        std::size_t pos = 0;
        for (const auto& m : matches) {
            next.append(work, pos, m.begin - pos);
            pos = m.end;
        }
        next.append(work, pos, work.size() - pos);
        work = std::move(next);
    }
    return collapse_whitespace(work);
}

}  // namespace prodkit::text
