#include "qspa/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qspa/protocol.hpp"

namespace qspa::io {

namespace {

using nlohmann::json;

void read_metadata(const json& j, FileMetadata* meta) {
  if (!meta) return;
  const auto it = j.find("metadata");
  if (it == j.end()) return;
  meta->config_hash = it->value("config_hash", "");
  meta->source_op = it->value("source_op", "");
  meta->tool_version = it->value("tool_version", "");
}

void append_metadata(std::ostringstream& os, const FileMetadata& meta) {
  os << "  \"metadata\": {\"config_hash\": \"" << meta.config_hash << "\", \"source_op\": \""
     << meta.source_op << "\", \"tool_version\": \"" << meta.tool_version << "\"}\n";
}

json parse_json(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(std::string(what) + ": malformed JSON");
  return j;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

std::string density_matrix_json(const Mat& rho, const FileMetadata& meta) {
  if (rho.rows() != 4 || rho.cols() != 4) {
    throw Error("density_matrix_json: expected a 4x4 matrix");
  }
  std::ostringstream os;
  os << "{\n  \"basis_labels\": [\"00\", \"01\", \"10\", \"11\"],\n";
  for (const bool imag : {false, true}) {
    os << "  \"" << (imag ? "imag" : "real") << "\": [\n";
    for (int i = 0; i < 4; ++i) {
      os << "    [";
      for (int j = 0; j < 4; ++j) {
        const double v = imag ? rho(i, j).imag() : rho(i, j).real();
        os << format_double(v) << (j < 3 ? ", " : "");
      }
      os << (i < 3 ? "],\n" : "]\n");
    }
    os << "  ],\n";
  }
  append_metadata(os, meta);
  os << "}\n";
  return os.str();
}

Mat parse_density_matrix_json(const std::string& text, FileMetadata* meta) {
  const json j = parse_json(text, "parse_density_matrix_json");
  if (!j.contains("real") || !j.contains("imag")) {
    throw Error("parse_density_matrix_json: missing real/imag arrays");
  }
  Mat rho(4, 4);
  try {
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < 4; ++k) {
        rho(i, k) = Complex(j["real"].at(i).at(k).get<double>(),
                            j["imag"].at(i).at(k).get<double>());
      }
    }
    read_metadata(j, meta);
  } catch (const json::exception& e) {
    throw Error(std::string("parse_density_matrix_json: bad structure: ") + e.what());
  }
  return rho;
}

std::string state_vector_json(const Vec& amplitudes, const FileMetadata& meta) {
  if (amplitudes.size() != 4) throw Error("state_vector_json: expected 4 amplitudes");
  std::ostringstream os;
  os << "{\n  \"basis_labels\": [\"00\", \"01\", \"10\", \"11\"],\n";
  for (const bool imag : {false, true}) {
    os << "  \"" << (imag ? "imag" : "real") << "\": [";
    for (int i = 0; i < 4; ++i) {
      const double v = imag ? amplitudes(i).imag() : amplitudes(i).real();
      os << format_double(v) << (i < 3 ? ", " : "");
    }
    os << "],\n";
  }
  append_metadata(os, meta);
  os << "}\n";
  return os.str();
}

Vec parse_state_vector_json(const std::string& text, FileMetadata* meta) {
  const json j = parse_json(text, "parse_state_vector_json");
  if (!j.contains("real") || !j.contains("imag")) {
    throw Error("parse_state_vector_json: missing real/imag arrays");
  }
  Vec v(4);
  try {
    for (int i = 0; i < 4; ++i) {
      v(i) = Complex(j["real"].at(i).get<double>(), j["imag"].at(i).get<double>());
    }
    read_metadata(j, meta);
  } catch (const json::exception& e) {
    throw Error(std::string("parse_state_vector_json: bad structure: ") + e.what());
  }
  return v;
}

std::string figure_csv(const tomo::FigureData& fig) {
  std::ostringstream os;
  os << "row,col,real,imag\n";
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      os << fig.basis_labels[i] << "," << fig.basis_labels[j] << ","
         << format_double(fig.real_part(i, j)) << "," << format_double(fig.imag_part(i, j))
         << "\n";
    }
  }
  return os.str();
}

std::string figure_json(const tomo::FigureData& fig, const FileMetadata& meta) {
  Mat rho(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) rho(i, j) = Complex(fig.real_part(i, j), fig.imag_part(i, j));
  return density_matrix_json(rho, meta);
}

std::string records_csv(const std::vector<tomo::ObservableRecord>& records) {
  std::ostringstream os;
  os << "experiment_id";
  for (int i = 1; i <= 8; ++i) os << ",obs_" << i;
  os << "\n";
  for (const auto& r : records) {
    os << r.experiment_id;
    for (double v : r.values) os << "," << format_double(v);
    os << "\n";
  }
  return os.str();
}

std::vector<tomo::ObservableRecord> parse_records_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw Error("parse_records_csv: empty input");
  std::vector<tomo::ObservableRecord> records;
  int line_number = 1;
  while (std::getline(is, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::istringstream fields(line);
    tomo::ObservableRecord record;
    std::string field;
    if (!std::getline(fields, field, ',')) {
      throw Error("parse_records_csv: bad line " + std::to_string(line_number));
    }
    record.experiment_id = field;
    for (int i = 0; i < 8; ++i) {
      if (!std::getline(fields, field, ',')) {
        throw Error("parse_records_csv: line " + std::to_string(line_number) +
                    " has fewer than 8 observables");
      }
      try {
        record.values[i] = std::stod(field);
      } catch (...) {
        throw Error("parse_records_csv: bad number on line " + std::to_string(line_number));
      }
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::string truth_table_csv(int outcome) {
  if (outcome != 0 && outcome != 1) throw Error("truth_table_csv: outcome must be 0 or 1");
  std::ostringstream os;
  os << "phi2\\phi1";
  for (Bb84Label phi1 : kAllBb84Labels) os << "," << to_string(phi1);
  os << "\n";
  for (Bb84Label phi2 : kAllBb84Labels) {
    os << to_string(phi2);
    for (Bb84Label phi1 : kAllBb84Labels) os << "," << to_string(truth_table(phi1, phi2, outcome));
    os << "\n";
  }
  return os.str();
}

std::string leakage_csv(const std::vector<adversary::LeakageReport>& curve) {
  std::ostringstream os;
  os << "rounds,guess_probability,p_plus_z,p_minus_z,p_plus_x,p_minus_x\n";
  for (const auto& report : curve) {
    os << report.rounds << "," << format_double(report.guess_probability);
    for (double p : report.distribution) os << "," << format_double(p);
    os << "\n";
  }
  return os.str();
}

std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> config;
  std::istringstream is(text);
  std::string line;
  int line_number = 0;
  while (std::getline(is, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto trim = [](std::string s) {
      const auto begin = s.find_first_not_of(" \t\r");
      if (begin == std::string::npos) return std::string();
      const auto end = s.find_last_not_of(" \t\r");
      return s.substr(begin, end - begin + 1);
    };
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw Error("config parse error at line " + std::to_string(line_number) +
                  ": expected key=value");
    }
    const std::string key = trim(trimmed.substr(0, eq));
    const std::string value = trim(trimmed.substr(eq + 1));
    if (key.empty()) {
      throw Error("config parse error at line " + std::to_string(line_number) + ": empty key");
    }
    config[key] = value;
  }
  return config;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << contents;
  if (!out) throw Error("write failed: " + path);
}

}  // namespace qspa::io
