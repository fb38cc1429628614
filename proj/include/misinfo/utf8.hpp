#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace misinfo::utf8 {

/// Byte offset of every Unicode scalar boundary in `text`: element i is the
/// byte where scalar i starts, and the last element equals text.size().
/// Returns an empty vector when `text` is not valid UTF-8.
std::vector<std::size_t> scalar_boundaries(std::string_view text);

bool is_valid(std::string_view text);

/// Number of Unicode scalar values; text must be valid UTF-8.
std::size_t scalar_length(std::string_view text);

}  // namespace misinfo::utf8
