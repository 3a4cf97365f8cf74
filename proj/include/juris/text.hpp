#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace juris {

// Decode the UTF-8 sequence starting at text[pos]. Advances pos past the
// sequence. Invalid bytes decode as U+FFFD and advance by one byte.
uint32_t utf8_decode(std::string_view text, size_t& pos);

void utf8_append(std::string& out, uint32_t cp);

std::vector<uint32_t> utf8_codepoints(std::string_view text);

// First n codepoints of text, never splitting a multi-byte sequence.
std::string truncate_codepoints(std::string_view text, size_t n);

size_t count_codepoints(std::string_view text);

bool is_unicode_space(uint32_t cp);

// Han ideograph ranges (URO, extension A, compatibility block).
bool is_cjk(uint32_t cp);

// Strip leading/trailing Unicode whitespace.
std::string trim(std::string_view s);

std::string to_lower_ascii(std::string_view s);

// Canonical form used for taxonomy membership: trimmed, byte-exact beyond
// that. Inputs are expected to be NFC-normalized upstream.
std::string canonical_term(std::string_view s);

}  // namespace juris
