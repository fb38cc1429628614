#pragma once

// Shared helpers for the newline-delimited JSON readers.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "misinfo/error.hpp"

namespace misinfo::detail {

using ojson = nlohmann::ordered_json;

inline std::string line_tag(std::size_t line) { return "line " + std::to_string(line); }

inline ojson parse_line(std::string_view text, std::size_t line) {
  ojson j = ojson::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::MalformedRecord, line_tag(line) + ": not a JSON object");
  }
  return j;
}

inline const ojson& require(const ojson& j, const char* name, std::size_t line) {
  const auto it = j.find(name);
  if (it == j.end() || it->is_null()) {
    throw Error(ErrorCode::MissingField, std::string(name) + " (" + line_tag(line) + ")");
  }
  return *it;
}

inline std::string require_string(const ojson& j, const char* name, std::size_t line) {
  const ojson& v = require(j, name, line);
  if (!v.is_string()) {
    throw Error(ErrorCode::MalformedRecord,
                line_tag(line) + ": field '" + name + "' must be a string");
  }
  return v.get<std::string>();
}

inline std::uint64_t require_u64(const ojson& j, const char* name, std::size_t line) {
  const ojson& v = require(j, name, line);
  if (!v.is_number_unsigned()) {
    throw Error(ErrorCode::MalformedRecord,
                line_tag(line) + ": field '" + name + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

inline std::string dump(const ojson& j) {
  return j.dump(-1, ' ', /*ensure_ascii=*/false, ojson::error_handler_t::strict);
}

}  // namespace misinfo::detail
