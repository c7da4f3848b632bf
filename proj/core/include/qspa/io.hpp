#pragma once

#include <map>
#include <string>
#include <vector>

#include "qspa/adversary.hpp"
#include "qspa/linalg.hpp"
#include "qspa/tomography.hpp"

namespace qspa::io {

/// Provenance block attached to every emitted file. Deliberately free of
/// timestamps so that repeated runs are byte-identical.
struct FileMetadata {
  std::string source_op;
  std::string config_hash;
  std::string tool_version;
};

/// Shortest text that parses back to exactly the same double would also do;
/// 17 significant digits are used so the files are lossless and the
/// formatting is uniform.
std::string format_double(double value);

/// FNV-1a 64-bit hash, hex-encoded; used for config fingerprints.
std::string fnv1a_hex(const std::string& data);

// --- density-matrix JSON files ---
// {
//   "basis_labels": ["00","01","10","11"],
//   "real": [[...4 rows...]],
//   "imag": [[...]],
//   "metadata": {"config_hash": ..., "source_op": ..., "tool_version": ...}
// }

std::string density_matrix_json(const Mat& rho, const FileMetadata& meta);
Mat parse_density_matrix_json(const std::string& text, FileMetadata* meta = nullptr);

// --- state-vector JSON files (same layout with flat arrays of 4) ---

std::string state_vector_json(const Vec& amplitudes, const FileMetadata& meta);
Vec parse_state_vector_json(const std::string& text, FileMetadata* meta = nullptr);

// --- figure data (16 real + 16 imaginary bars) ---

std::string figure_csv(const tomo::FigureData& fig);
std::string figure_json(const tomo::FigureData& fig, const FileMetadata& meta);

// --- tomography observable records ---
// header: experiment_id,obs_1,...,obs_8

std::string records_csv(const std::vector<tomo::ObservableRecord>& records);
std::vector<tomo::ObservableRecord> parse_records_csv(const std::string& text);

// --- truth tables and leakage curves ---

std::string truth_table_csv(int outcome);
std::string leakage_csv(const std::vector<adversary::LeakageReport>& curve);

// --- flat key=value config files ('#' comments) ---

std::map<std::string, std::string> parse_config(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace qspa::io
