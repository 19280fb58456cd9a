#include "aiq/io.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

namespace aiq {

json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::ParseError, "matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw Error(ErrorKind::ParseError, "ragged matrix row " + std::to_string(i));
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& z = row[k];
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
        throw Error(ErrorKind::ParseError, "matrix entries must be [re, im] pairs");
      m(i, k) = cplx(z[0].get<double>(), z[1].get<double>());
    }
  }
  return m;
}

json channel_to_json(const Channel& ch, const json& source) {
  json j;
  j["format"] = kChannelFormat;
  j["picture"] = ch.picture == Picture::heisenberg ? "heisenberg" : "schrodinger";
  j["dim_in"] = ch.dim_in;
  j["dim_out"] = ch.dim_out;
  j["convention"] = "choi = sum_ij E_ij (x) Phi(E_ij), input factor first, column-stacking vec";
  j["choi"] = to_json(to_choi(ch));
  j["source"] = source;
  return j;
}

Channel channel_from_json(const json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kChannelFormat)
      throw Error(ErrorKind::ParseError, std::string("expected \"format\": \"") + kChannelFormat + "\"");
    const int din = j.at("dim_in").get<int>(), dout = j.at("dim_out").get<int>();
    if (din <= 0 || dout <= 0) throw Error(ErrorKind::ParseError, "dimensions must be positive");
    const std::string pic = j.at("picture").get<std::string>();
    if (pic != "heisenberg" && pic != "schrodinger") throw Error(ErrorKind::ParseError, "unknown picture " + pic);
    Mat choi = mat_from_json(j.at("choi"));
    if (choi.rows() != din * dout || choi.cols() != din * dout)
      throw Error(ErrorKind::ParseError, "choi shape does not match dims");
    return from_choi(choi, din, dout, pic == "heisenberg" ? Picture::heisenberg : Picture::schrodinger);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

json to_json(const NormCertificate& c) {
  return {{"value", c.value}, {"upper", c.upper},           {"lower", c.lower},
          {"gap", c.gap},     {"iterations", c.iterations}, {"stalled", c.stalled}};
}

json to_json(const ValidityFlags& f) {
  return {{"cp", f.cp},
          {"unital", f.unital},
          {"trace_preserving", f.trace_preserving},
          {"choi_min_eig", f.choi_min_eig},
          {"unital_residual", f.unital_residual},
          {"tp_residual", f.tp_residual}};
}

json to_json(const BlockSpec& s) { return s.block_dims; }

BlockSpec spec_from_json(const json& j) {
  try {
    return BlockSpec{j.get<std::vector<int>>()};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& text) {
  static const std::regex whole(R"(^\s*\(\s*\d+\s*,\s*\d+\s*\)(\s*,\s*\(\s*\d+\s*,\s*\d+\s*\))*\s*$)");
  static const std::regex pair(R"(\(\s*(\d+)\s*,\s*(\d+)\s*\))");
  if (!std::regex_match(text, whole)) throw Error(ErrorKind::BadSpec, "expected pairs like (2,2),(1,3): " + text);
  std::vector<std::pair<int, int>> out;
  for (std::sregex_iterator it(text.begin(), text.end(), pair), end; it != end; ++it) {
    int d = std::stoi((*it)[1]), e = std::stoi((*it)[2]);
    if (d <= 0 || e <= 0) throw Error(ErrorKind::BadSpec, "block sizes must be positive");
    out.emplace_back(d, e);
  }
  return out;
}

std::vector<int> parse_sizes(const std::string& text) {
  static const std::regex whole(R"(^\s*\(?\s*\d+(\s*,\s*\d+)*\s*\)?\s*$)");
  static const std::regex num(R"(\d+)");
  if (!std::regex_match(text, whole)) throw Error(ErrorKind::BadSpec, "expected sizes like 3,2,1: " + text);
  std::vector<int> out;
  for (std::sregex_iterator it(text.begin(), text.end(), num), end; it != end; ++it) {
    int d = std::stoi(it->str());
    if (d <= 0) throw Error(ErrorKind::BadSpec, "block sizes must be positive");
    out.push_back(d);
  }
  return out;
}

std::string digest(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::ParseError, "cannot write " + tmp);
    out << text;
    if (!out.flush()) throw Error(ErrorKind::ParseError, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void write_json_atomic(const std::string& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

}  // namespace aiq
