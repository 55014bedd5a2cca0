#pragma once

// Hamiltonian / operator file format: a single JSON document with separate
// real and imaginary arrays, which keeps complex literals unambiguous:
//   {"n": 2, "re": [[1,0],[0,2]], "im": [[0,0],[0,0]], "label": "diag(1,2)"}

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pcat/complex_matrix.hpp"
#include "pcat/errors.hpp"

namespace pcat {

struct HamiltonianFile {
  ComplexMatrix matrix;
  std::optional<std::string> label;
};

inline HamiltonianFile parse_hamiltonian_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("hamiltonian file: expected a JSON object");
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw ParseError("hamiltonian file: missing integer field 'n'");
  const int n = j["n"].get<int>();
  if (n <= 0) throw ParseError("hamiltonian file: 'n' must be positive");
  for (const char* key : {"re", "im"}) {
    if (!j.contains(key))
      throw ParseError(std::string("hamiltonian file: missing field '") + key + "'");
  }
  HamiltonianFile out;
  out.matrix = ComplexMatrix(n);
  for (int part = 0; part < 2; ++part) {
    const nlohmann::json& arr = part == 0 ? j["re"] : j["im"];
    if (!arr.is_array() || static_cast<int>(arr.size()) != n)
      throw ParseError("hamiltonian file: 're'/'im' must be n rows");
    for (int i = 0; i < n; ++i) {
      const nlohmann::json& row = arr[static_cast<size_t>(i)];
      if (!row.is_array() || static_cast<int>(row.size()) != n)
        throw ParseError("hamiltonian file: row length must be n");
      for (int jcol = 0; jcol < n; ++jcol) {
        const nlohmann::json& cell = row[static_cast<size_t>(jcol)];
        if (!cell.is_number())
          throw ParseError("hamiltonian file: entries must be numbers");
        const double v = cell.get<double>();
        cplx& z = out.matrix(i, jcol);
        z = part == 0 ? cplx(v, z.imag()) : cplx(z.real(), v);
      }
    }
  }
  if (!out.matrix.is_finite())
    throw ParseError("hamiltonian file: entries must be finite");
  if (j.contains("label")) {
    if (!j["label"].is_string())
      throw ParseError("hamiltonian file: 'label' must be a string");
    out.label = j["label"].get<std::string>();
  }
  return out;
}

inline HamiltonianFile parse_hamiltonian_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("hamiltonian file: invalid JSON");
  return parse_hamiltonian_json(j);
}

inline HamiltonianFile read_hamiltonian_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_hamiltonian_string(buf.str());
}

inline nlohmann::ordered_json hamiltonian_to_json(const HamiltonianFile& hf) {
  const int n = hf.matrix.dim();
  nlohmann::ordered_json j;
  j["n"] = n;
  nlohmann::ordered_json re = nlohmann::ordered_json::array();
  nlohmann::ordered_json im = nlohmann::ordered_json::array();
  for (int i = 0; i < n; ++i) {
    nlohmann::ordered_json re_row = nlohmann::ordered_json::array();
    nlohmann::ordered_json im_row = nlohmann::ordered_json::array();
    for (int k = 0; k < n; ++k) {
      re_row.push_back(hf.matrix(i, k).real());
      im_row.push_back(hf.matrix(i, k).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  if (hf.label) j["label"] = *hf.label;
  return j;
}

inline void write_hamiltonian_file(const std::string& path,
                                   const HamiltonianFile& hf) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << hamiltonian_to_json(hf).dump(2) << "\n";
}

}  // namespace pcat
