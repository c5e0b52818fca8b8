#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "truncbound/censor.hpp"
#include "truncbound/error.hpp"
#include "truncbound/kernel.hpp"
#include "truncbound/models.hpp"
#include "truncbound/representation.hpp"
#include "truncbound/state_space.hpp"

namespace truncbound::io {

using nlohmann::json;

/// 17 significant digits, enough to read back the identical double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Labels

inline json label_to_json(const Label& l) { return json(l); }

inline Label label_from_json(const json& j) {
  if (j.is_number_integer()) return {j.get<std::int64_t>()};
  if (!j.is_array())
    fail(ErrorCode::ParseError, "label must be an integer or integer array");
  Label l;
  for (const auto& v : j) {
    if (!v.is_number_integer())
      fail(ErrorCode::ParseError, "label coordinates must be integers");
    l.push_back(v.get<std::int64_t>());
  }
  return l;
}

inline std::vector<Label> labels_from_json(const json& j) {
  if (!j.is_array()) fail(ErrorCode::ParseError, "expected an array of labels");
  std::vector<Label> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(label_from_json(v));
  return out;
}

inline json labels_to_json(const std::vector<Label>& labels) {
  json arr = json::array();
  for (const auto& l : labels) arr.push_back(label_to_json(l));
  return arr;
}

/// Sidecar mapping matrix index -> label: {"schema_version":1,"labels":[...]}
inline json label_sidecar(const StateSpace& space) {
  return {{"schema_version", 1}, {"labels", labels_to_json(space.labels())}};
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorCode::IoError, "write to '" + path + "' failed");
}

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, origin + ": " + e.what());
  }
}

inline json read_json(const std::string& path) {
  return parse_json(read_text(path), path);
}

// ---------------------------------------------------------------------------
// Matrix Market (coordinate, real, general)

inline void write_matrix_market(std::ostream& out, const SparseKernel& k) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << k.rows() << ' ' << k.cols() << ' ' << k.nonzeros() << '\n';
  for (Index r = 0; r < k.rows(); ++r)
    for (const auto& e : k.row(r))
      out << r + 1 << ' ' << e.col + 1 << ' ' << format_double(e.value) << '\n';
}

inline void write_matrix_market(std::ostream& out, const RowMatrix& m) {
  std::size_t nnz = 0;
  for (Eigen::Index i = 0; i < m.size(); ++i) nnz += m.data()[i] != 0.0;
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (m(r, c) != 0.0)
        out << r + 1 << ' ' << c + 1 << ' ' << format_double(m(r, c)) << '\n';
}

/// Parses a coordinate real general Matrix Market stream. Entries are taken
/// as-is (negative values parse; validate_kernel rejects them later).
inline SparseKernel read_matrix_market(std::istream& in,
                                       const std::string& origin = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  auto error = [&](const std::string& msg) {
    fail(ErrorCode::ParseError, origin + ":" + std::to_string(line_no) + ": " + msg);
  };

  if (!std::getline(in, line)) {
    line_no = 1;
    error("empty file");
  }
  ++line_no;
  {
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    auto lower = [](std::string s) {
      std::transform(s.begin(), s.end(), s.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      return s;
    };
    if (banner != "%%MatrixMarket" || lower(object) != "matrix" ||
        lower(format) != "coordinate")
      error("expected '%%MatrixMarket matrix coordinate real general'");
    if (lower(field) != "real" && lower(field) != "double")
      error("only real matrices are supported");
    if (lower(symmetry) != "general") error("only general matrices are supported");
  }

  auto next_content = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '%') continue;
      return true;
    }
    return false;
  };

  if (!next_content()) error("missing size line");
  long long n_rows = -1, n_cols = -1, nnz = -1;
  {
    std::istringstream ss(line);
    std::string extra;
    if (!(ss >> n_rows >> n_cols >> nnz) || (ss >> extra) || n_rows < 0 ||
        n_cols < 0 || nnz < 0)
      error("malformed size line");
  }
  std::vector<SparseKernel::Row> rows(static_cast<std::size_t>(n_rows));
  std::vector<std::vector<Index>> seen(static_cast<std::size_t>(n_rows));
  for (long long k = 0; k < nnz; ++k) {
    if (!next_content()) error("expected " + std::to_string(nnz) + " entries, found " +
                               std::to_string(k));
    std::istringstream ss(line);
    long long i = 0, j = 0;
    std::string value_text, extra;
    if (!(ss >> i >> j >> value_text) || (ss >> extra)) error("malformed entry");
    if (i < 1 || i > n_rows || j < 1 || j > n_cols) error("index out of range");
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(value_text, &used);
      if (used != value_text.size()) error("malformed value '" + value_text + "'");
    } catch (const std::logic_error&) {
      error("malformed value '" + value_text + "'");
    }
    if (!std::isfinite(v)) error("non-finite value");
    const auto r = static_cast<std::size_t>(i - 1);
    const auto c = static_cast<Index>(j - 1);
    for (Index prev : seen[r])
      if (prev == c) error("duplicate entry");
    seen[r].push_back(c);
    rows[r].push_back({c, v});
  }
  if (next_content()) error("trailing data after " + std::to_string(nnz) + " entries");
  return SparseKernel(static_cast<std::size_t>(n_rows),
                      static_cast<std::size_t>(n_cols), std::move(rows));
}

inline SparseKernel read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  return read_matrix_market(in, path);
}

struct LabeledKernel {
  StateSpace space;
  SparseKernel kernel;
};

/// Reads a square kernel and its optional label sidecar. Rows and columns
/// are permuted into the canonical label order; without a sidecar labels
/// are 0..n-1.
inline LabeledKernel read_labeled_kernel(const std::string& matrix_path,
                                         const std::optional<std::string>& labels_path) {
  SparseKernel raw = read_matrix_market(matrix_path);
  if (!raw.square())
    fail(ErrorCode::DimensionMismatch, matrix_path + ": kernel must be square");
  if (!labels_path) return {StateSpace::range(raw.rows()), std::move(raw)};

  const json side = read_json(*labels_path);
  if (!side.is_object() || !side.contains("labels"))
    fail(ErrorCode::ParseError, *labels_path + ": missing 'labels'");
  std::vector<Label> file_labels = labels_from_json(side.at("labels"));
  if (file_labels.size() != raw.rows())
    fail(ErrorCode::DimensionMismatch,
         *labels_path + " lists " + std::to_string(file_labels.size()) +
             " labels, matrix has " + std::to_string(raw.rows()) + " states");
  StateSpace space(file_labels);
  std::vector<Index> perm(raw.rows());  // file index -> canonical index
  for (Index i = 0; i < raw.rows(); ++i) perm[i] = space.index_of(file_labels[i]);
  std::vector<SparseKernel::Row> rows(raw.rows());
  for (Index i = 0; i < raw.rows(); ++i)
    for (const auto& e : raw.row(i)) rows[perm[i]].push_back({perm[e.col], e.value});
  return {std::move(space), SparseKernel(raw.rows(), std::move(rows))};
}

inline void write_labeled_kernel(const std::string& matrix_path,
                                 const std::string& labels_path,
                                 const StateSpace& space, const SparseKernel& k) {
  if (space.size() != k.rows())
    fail(ErrorCode::DimensionMismatch, "labels and kernel sizes differ");
  std::ostringstream mm;
  write_matrix_market(mm, k);
  write_text(matrix_path, mm.str());
  write_text(labels_path, label_sidecar(space).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Nu tables and distributions

/// CSV label cell: coordinates joined by ':'.
inline std::string csv_label(const Label& l) {
  std::string s;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (i) s += ':';
    s += std::to_string(l[i]);
  }
  return s;
}

/// Header `label,g,<y_0>,...`; one row per x with g(x) and nu_x.
inline void write_nu_csv(std::ostream& out, const StateSpace& inner,
                         const NuTable& nt) {
  if (inner.size() != nt.size())
    fail(ErrorCode::DimensionMismatch, "labels and nu table sizes differ");
  out << "label,g";
  for (const auto& l : inner.labels()) out << ',' << csv_label(l);
  out << '\n';
  for (std::size_t x = 0; x < nt.size(); ++x) {
    out << csv_label(inner.label(x)) << ',' << format_double(nt.g[x]);
    for (std::size_t y = 0; y < nt.size(); ++y)
      out << ',' << format_double(nt.nu(static_cast<Eigen::Index>(x),
                                         static_cast<Eigen::Index>(y)));
    out << '\n';
  }
}

inline json distribution_to_json(const StateSpace& space, const Distribution& d) {
  if (space.size() != d.size())
    fail(ErrorCode::DimensionMismatch, "labels and distribution sizes differ");
  return {{"labels", labels_to_json(space.labels())}, {"weights", d.weights()}};
}

inline std::pair<StateSpace, Distribution> distribution_from_json(const json& j) {
  if (!j.is_object() || !j.contains("labels") || !j.contains("weights"))
    fail(ErrorCode::ParseError, "distribution needs 'labels' and 'weights'");
  std::vector<Label> labels = labels_from_json(j.at("labels"));
  std::vector<double> w = j.at("weights").get<std::vector<double>>();
  if (labels.size() != w.size())
    fail(ErrorCode::DimensionMismatch, "labels and weights differ in length");
  StateSpace space(labels);
  std::vector<double> canonical(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) canonical[space.index_of(labels[i])] = w[i];
  return {std::move(space), Distribution(std::move(canonical))};
}

// ---------------------------------------------------------------------------
// Model specs

inline json model_to_json(const ModelSpec& m) {
  json j{{"family", family_name(m.family)}, {"params", m.params}};
  if (m.family == ModelFamily::RandomDense) j["seed"] = m.seed;
  return j;
}

inline ModelSpec model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("family"))
    fail(ErrorCode::ConfigInvalid, "model needs a 'family'");
  ModelSpec m;
  try {
    m.family = parse_family(j.at("family").get<std::string>());
    if (j.contains("params"))
      m.params = j.at("params").get<std::map<std::string, double>>();
    if (j.contains("seed")) m.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigInvalid, std::string("model: ") + e.what());
  }
  validate_model(m);
  return m;
}

}  // namespace truncbound::io
