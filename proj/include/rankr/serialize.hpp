#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rankr/binary_io.hpp"
#include "rankr/data.hpp"
#include "rankr/equivalence.hpp"
#include "rankr/model.hpp"

namespace rankr {

/// Model files are self-describing: key=value header lines, a lone
/// `end_header`, then the weights as little-endian 64-bit floats. Factored
/// models store each neuron's factors (q ascending, then mode ascending,
/// each row-major) followed by the output matrix row-major; flat networks
/// store the hidden weight matrix then the output matrix, both row-major.
/// Round trips are exact to the bit.

namespace detail {

inline std::map<std::string, std::string> read_header_until_end(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line == "end_header") return kv;
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("model header: malformed line (expected key=value): " + line);
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  throw std::runtime_error("model header: missing end_header terminator");
}

inline std::vector<std::size_t> parse_shape_list(const std::string& s) {
  std::vector<std::size_t> shape;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("model header: bad shape entry: " + item);
    }
    if (pos != item.size()) throw std::runtime_error("model header: bad shape entry: " + item);
    shape.push_back(static_cast<std::size_t>(v));
  }
  if (shape.empty()) throw std::runtime_error("model header: empty shape");
  return shape;
}

inline std::string shape_to_string(const std::vector<std::size_t>& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(shape[i]);
  }
  return out;
}

inline void write_matrix_payload(std::ostream& out, const Matrix& m) {
  for (double v : m.data()) write_f64_le(out, v);
}

inline void read_matrix_payload(std::istream& in, Matrix& m) {
  for (double& v : m.data()) v = read_f64_le(in);
}

inline void expect_end_of_payload(std::istream& in, const std::string& path) {
  in.peek();
  if (!in.eof()) {
    throw std::runtime_error("model file has trailing bytes after payload: " + path);
  }
}

inline std::ifstream open_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  return in;
}

}  // namespace detail

inline void save_model(const RankRModel& m, const std::string& path) {
  m.config.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create model file: " + path);
  out << "family=rank_r\n";
  out << "shape=" << detail::shape_to_string(m.config.input_shape) << "\n";
  out << "rank=" << m.config.rank << "\n";
  out << "hidden=" << m.config.hidden << "\n";
  out << "classes=" << m.config.classes << "\n";
  out << "activation=" << activation_name(m.config.activation) << "\n";
  out << "seed=" << m.config.seed << "\n";
  out << "end_header\n";
  for (const CpFactors& w : m.hidden_weights) {
    for (const Matrix& f : w.factors) detail::write_matrix_payload(out, f);
  }
  detail::write_matrix_payload(out, m.output_weights);
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

inline void save_fcfnn(const Fcfnn& f, const std::string& path) {
  f.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create model file: " + path);
  out << "family=fcfnn\n";
  out << "input_dim=" << f.input_dim << "\n";
  out << "hidden=" << f.hidden() << "\n";
  out << "classes=" << f.classes() << "\n";
  out << "activation=" << activation_name(f.activation) << "\n";
  out << "end_header\n";
  detail::write_matrix_payload(out, f.hidden_weights);
  detail::write_matrix_payload(out, f.output_weights);
  if (!out) throw std::runtime_error("failed writing model file: " + path);
}

/// Reads only the header and reports which network family the file holds.
inline ParamFamily peek_model_family(const std::string& path) {
  std::ifstream in = detail::open_model_file(path);
  const auto kv = detail::read_header_until_end(in);
  const std::string& family = detail::header_field(kv, "family");
  if (family == "rank_r") return ParamFamily::kRankR;
  if (family == "fcfnn") return ParamFamily::kFcfnn;
  throw std::runtime_error("model header: unknown family: " + family);
}

inline RankRModel load_model(const std::string& path) {
  std::ifstream in = detail::open_model_file(path);
  const auto kv = detail::read_header_until_end(in);
  if (detail::header_field(kv, "family") != "rank_r") {
    throw std::runtime_error("model file does not hold a factored model: " + path);
  }
  ModelConfig cfg;
  cfg.input_shape = detail::parse_shape_list(detail::header_field(kv, "shape"));
  cfg.rank = detail::header_uint(kv, "rank");
  cfg.hidden = detail::header_uint(kv, "hidden");
  cfg.classes = detail::header_uint(kv, "classes");
  cfg.activation = parse_activation(detail::header_field(kv, "activation"));
  cfg.seed = detail::header_uint(kv, "seed");
  cfg.validate();

  RankRModel m(cfg);
  for (CpFactors& w : m.hidden_weights) {
    for (Matrix& f : w.factors) detail::read_matrix_payload(in, f);
  }
  detail::read_matrix_payload(in, m.output_weights);
  detail::expect_end_of_payload(in, path);
  return m;
}

inline Fcfnn load_fcfnn(const std::string& path) {
  std::ifstream in = detail::open_model_file(path);
  const auto kv = detail::read_header_until_end(in);
  if (detail::header_field(kv, "family") != "fcfnn") {
    throw std::runtime_error("model file does not hold a flat network: " + path);
  }
  Fcfnn f;
  f.input_dim = detail::header_uint(kv, "input_dim");
  const std::size_t hidden = detail::header_uint(kv, "hidden");
  const std::size_t classes = detail::header_uint(kv, "classes");
  f.activation = parse_activation(detail::header_field(kv, "activation"));
  if (hidden == 0 || classes < 2 || f.input_dim == 0) {
    throw std::runtime_error("model header: degenerate flat network dimensions");
  }
  f.hidden_weights = Matrix(hidden, f.input_dim);
  f.output_weights = Matrix(hidden, classes);
  detail::read_matrix_payload(in, f.hidden_weights);
  detail::read_matrix_payload(in, f.output_weights);
  detail::expect_end_of_payload(in, path);
  return f;
}

}  // namespace rankr
