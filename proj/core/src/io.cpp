#include "passmat/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "passmat/errors.hpp"

namespace passmat::io {
namespace {

using nlohmann::json;

json Parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string(what) + ": malformed JSON: " + e.what());
  }
}

double Number(const json& v, const char* what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw InvalidInput(std::string(what) + ": expected a number");
}

// Rows × cols from a nested array; an empty array is 0×cols_hint.
Matrix ToMatrix(const json& v, const char* what, Eigen::Index cols_hint = 0) {
  if (!v.is_array()) throw InvalidInput(std::string(what) + ": expected a nested array");
  if (v.empty()) return Matrix(0, cols_hint);
  const Eigen::Index rows = static_cast<Eigen::Index>(v.size());
  if (!v[0].is_array()) throw InvalidInput(std::string(what) + ": expected rows to be arrays");
  const Eigen::Index cols = static_cast<Eigen::Index>(v[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidInput(std::string(what) + ": ragged matrix");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Number(row[static_cast<std::size_t>(j)], what);
  }
  return m;
}

// Non-finite values are written as strings so the output stays valid JSON.
json FromDouble(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

json FromMatrix(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(FromDouble(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json CertJson(const PassivityCertificate& c) {
  json j;
  j["phi"] = FromMatrix(c.phi().matrix());
  j["xi"] = FromMatrix(c.xi().matrix());
  j["kind"] = to_string(c.kind());
  j["provenance"] = to_string(c.provenance());
  j["storage"] = c.storage() ? FromMatrix(c.storage()->matrix()) : json(nullptr);
  return j;
}

const json& Required(const json& obj, const char* key, const char* what) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw InvalidInput(std::string(what) + ": missing key \"" + key + "\"");
  }
  return obj.at(key);
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  out << content;
}

StateSpace parse_system(const std::string& json_text) {
  const json j = Parse(json_text, "system");
  const Matrix d = ToMatrix(Required(j, "D", "system"), "system.D");
  const Matrix a = ToMatrix(Required(j, "A", "system"), "system.A");
  const Matrix b = ToMatrix(Required(j, "B", "system"), "system.B", d.cols());
  const Matrix c = ToMatrix(Required(j, "C", "system"), "system.C");
  // An empty C for n = 0 still has m rows.
  const Matrix c_fixed = (c.size() == 0 && a.rows() == 0) ? Matrix(d.rows(), 0) : c;
  return StateSpace(a, b, c_fixed, d);
}

std::string system_to_json(const StateSpace& sys) {
  json j;
  j["A"] = FromMatrix(sys.A());
  j["B"] = FromMatrix(sys.B());
  j["C"] = FromMatrix(sys.C());
  j["D"] = FromMatrix(sys.D());
  return j.dump(2) + "\n";
}

PassivityCertificate parse_certificate(const std::string& json_text) {
  const json j = Parse(json_text, "certificate");
  const Matrix phi = ToMatrix(Required(j, "phi", "certificate"), "certificate.phi");
  const Matrix xi = ToMatrix(Required(j, "xi", "certificate"), "certificate.xi");
  const json& kind = Required(j, "kind", "certificate");
  if (!kind.is_string()) throw InvalidInput("certificate.kind must be a string");
  Provenance prov = Provenance::Declared;
  if (j.contains("provenance") && !j["provenance"].is_null()) {
    if (!j["provenance"].is_string()) throw InvalidInput("certificate.provenance must be a string");
    prov = parse_provenance(j["provenance"].get<std::string>());
  }
  std::optional<SymmetricMatrix> storage;
  if (j.contains("storage") && !j["storage"].is_null()) {
    storage = SymmetricMatrix(ToMatrix(j["storage"], "certificate.storage"));
  }
  return PassivityCertificate(SymmetricMatrix(phi), SymmetricMatrix(xi), parse_kind(kind.get<std::string>()), prov,
                              storage);
}

std::string certificate_to_json(const PassivityCertificate& cert) { return CertJson(cert).dump(2) + "\n"; }

Matrix parse_matrix(const std::string& json_text) {
  const json j = Parse(json_text, "matrix");
  if (j.is_object()) return ToMatrix(Required(j, "K", "matrix"), "matrix.K");
  return ToMatrix(j, "matrix");
}

SmibParams parse_smib_params(const std::string& json_text) {
  const json j = Parse(json_text, "smib params");
  if (!j.is_object()) throw InvalidInput("smib params: expected an object");
  SmibParams p;
  const std::pair<const char*, double*> fields[] = {
      {"omega0", &p.omega0}, {"Tj", &p.Tj}, {"D", &p.D},   {"Td0p", &p.Td0p}, {"xd", &p.xd},
      {"xq", &p.xq},         {"xdp", &p.xdp}, {"U", &p.U}, {"Pm0", &p.Pm0},   {"Ef0", &p.Ef0}};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const auto& [name, dst] : fields) {
      if (it.key() == name) {
        *dst = Number(it.value(), name);
        known = true;
      }
    }
    if (!known) throw InvalidInput("smib params: unknown field \"" + it.key() + "\"");
  }
  p.Validate();
  return p;
}

std::string smib_params_to_json(const SmibParams& p) {
  json j;
  j["omega0"] = p.omega0;
  j["Tj"] = p.Tj;
  j["D"] = p.D;
  j["Td0p"] = p.Td0p;
  j["xd"] = p.xd;
  j["xq"] = p.xq;
  j["xdp"] = p.xdp;
  j["U"] = p.U;
  j["Pm0"] = p.Pm0;
  j["Ef0"] = p.Ef0;
  return j.dump(2) + "\n";
}

std::string verdict_to_json(const InterconnectionVerdict& v) {
  json j;
  j["satisfied"] = v.satisfied;
  j["margin"] = FromDouble(v.margin);
  j["binding_condition"] = v.binding_condition;
  j["composed"] = v.composed ? CertJson(*v.composed) : json(nullptr);
  j["gain_estimate"] = v.gain_estimate ? FromDouble(*v.gain_estimate) : json(nullptr);
  return j.dump(2) + "\n";
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  // snprintf honours LC_NUMERIC; force '.' as the decimal separator.
  for (char* c = buf; *c != '\0'; ++c) {
    if (*c == ',') *c = '.';
  }
  return buf;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace passmat::io
