#include "evpos/model.h"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace evpos::model {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void schema(const std::string& what) {
  throw Error(ErrorCode::kSchemaError, what);
}

Matrix matrix_from(const Json& j, const std::string& name) {
  if (!j.is_array()) schema(name + " must be an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix out;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[r];
    if (!row.is_array()) schema(name + " row " + std::to_string(r) + " is not an array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      out.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      schema(name + " is ragged");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[c].is_number()) schema(name + " has a non-numeric entry");
      out(r, c) = row[c].get<double>();
    }
  }
  if (rows == 0) out.resize(0, 0);
  return out;
}

Json matrix_to(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

int count_field(const Json& doc, const char* key, int fallback) {
  if (!doc.contains(key)) return fallback;
  const Json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    schema(std::string(key) + " must be a nonnegative integer");
  }
  return static_cast<int>(v.get<long long>());
}

void expect_shape(const Matrix& m, const std::string& name, Eigen::Index rows,
                  Eigen::Index cols) {
  // An empty array stands for a matrix with a zero dimension.
  if (m.size() == 0 && rows * cols == 0) return;
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream msg;
    msg << name << " is " << m.rows() << "x" << m.cols() << ", expected " << rows << "x"
        << cols;
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
}

}  // namespace

void Tolerances::set(std::string_view key, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    schema("tolerance " + std::string(key) + " must be positive and finite");
  }
  if (key == "eig") eig = value;
  else if (key == "entry") entry = value;
  else if (key == "gridStep") {
    grid_step = value;
    grid_step_explicit = true;
  }
  else if (key == "cone") cone = value;
  else if (key == "decrease") decrease = value;
  else schema("unknown tolerance " + std::string(key));
}

ModelDocument parse_model(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    schema(std::string("model is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema("model must be a JSON object");
  if (!doc.contains("A")) schema("model needs A");
  if (!doc.contains("n")) schema("model needs n");

  ModelDocument out;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) schema("name must be a string");
    out.name = doc["name"].get<std::string>();
  }
  const Matrix a = matrix_from(doc["A"], "A");
  if (a.rows() == 0) schema("A is empty");
  const int n = count_field(doc, "n", static_cast<int>(a.rows()));
  expect_shape(a, "A", n, n);

  out.has_b = doc.contains("B");
  out.has_c = doc.contains("C");
  out.has_d = doc.contains("D");
  const Matrix b = out.has_b ? matrix_from(doc["B"], "B") : Matrix(n, 0);
  const Matrix c = out.has_c ? matrix_from(doc["C"], "C") : Matrix(0, n);
  const int m = count_field(doc, "m", out.has_b ? static_cast<int>(b.cols()) : 0);
  const int k = count_field(doc, "k", out.has_c ? static_cast<int>(c.rows()) : 0);
  if (!out.has_b && m != 0) schema("m > 0 declared without B");
  if (!out.has_c && k != 0) schema("k > 0 declared without C");
  expect_shape(b, "B", n, m);
  expect_shape(c, "C", k, n);
  Matrix d = out.has_d ? matrix_from(doc["D"], "D") : Matrix::Zero(k, m);
  expect_shape(d, "D", k, m);

  out.sys.a = a;
  out.sys.b = b.size() ? b : Matrix(n, m);
  out.sys.c = c.size() ? c : Matrix(k, n);
  out.sys.d = d.size() ? d : Matrix(k, m);
  out.sys.validate();

  if (doc.contains("tolerances")) {
    const Json& t = doc["tolerances"];
    if (!t.is_object()) schema("tolerances must be an object");
    for (const auto& [key, value] : t.items()) {
      if (!value.is_number()) schema("tolerance " + key + " must be a number");
      out.tol.set(key, value.get<double>());
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) schema("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ModelDocument load_model(const std::string& path) { return parse_model(read_file(path)); }

std::string write_model(const ModelDocument& doc) {
  Json j;
  j["name"] = doc.name;
  j["n"] = doc.sys.n();
  j["m"] = doc.sys.m();
  j["k"] = doc.sys.k();
  j["A"] = matrix_to(doc.sys.a);
  if (doc.has_b) j["B"] = matrix_to(doc.sys.b);
  if (doc.has_c) j["C"] = matrix_to(doc.sys.c);
  if (doc.has_d) j["D"] = matrix_to(doc.sys.d);
  Json tol = {{"eig", doc.tol.eig}, {"entry", doc.tol.entry}};
  if (doc.tol.grid_step_explicit) tol["gridStep"] = doc.tol.grid_step;
  tol["cone"] = doc.tol.cone;
  tol["decrease"] = doc.tol.decrease;
  j["tolerances"] = std::move(tol);
  return j.dump(2) + "\n";
}

Vector parse_vector(std::string_view text) {
  std::vector<double> values;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || errno == ERANGE) {
      schema("not a number: " + token);
    }
    values.push_back(v);
    token.clear();
  };
  for (char ch : text) {
    if (ch == ',' || ch == ';' || std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Vector load_vector(const std::string& path) { return parse_vector(read_file(path)); }

}  // namespace evpos::model
