#pragma once

#include <map>
#include <string>
#include <string_view>

#include "evpos/iosys.h"

namespace evpos::model {

struct Tolerances {
  double eig = 1e-8;
  double entry = 1e-9;
  double grid_step = 0.01;
  /// False until gridStep is given; the exponential index then picks its own
  /// step.
  bool grid_step_explicit = false;
  double cone = 1e-7;
  double decrease = 1e-9;

  /// Sets one field by its JSON key (eig, entry, gridStep, cone, decrease).
  /// Throws kSchemaError for an unknown key or a non-positive value.
  void set(std::string_view key, double value);
};

/// {"name": ..., "n": 3, "m": 1, "k": 1, "A": [[...]], "B": ..., "C": ...,
///  "D": ..., "tolerances": {"eig": 1e-8, ...}}
///
/// B, C, D are optional; missing D becomes zeros. Declared m and k must match
/// the arrays when present.
struct ModelDocument {
  std::string name;
  iosys::LtiSystem sys;
  bool has_b = false;
  bool has_c = false;
  bool has_d = false;
  Tolerances tol;
};

/// Throws kSchemaError on malformed input and kDimensionMismatch on shapes
/// that disagree with the declared counts.
ModelDocument parse_model(std::string_view text);
ModelDocument load_model(const std::string& path);

/// Inverse of parse_model; doubles are printed with round-trip precision.
std::string write_model(const ModelDocument& doc);

/// Reads a vector from comma, whitespace, or newline separated numbers.
Vector parse_vector(std::string_view text);
Vector load_vector(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace evpos::model
