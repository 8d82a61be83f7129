#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "evpos/types.h"

namespace evpos::report {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Infinite or NaN values become the strings "inf", "-inf", "nan".
Json number(double x);
Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Json to_json(const Complex& z);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string input_hash(std::string_view bytes);

/// Writes through a temporary file in the same directory and renames it over
/// the target.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace evpos::report
