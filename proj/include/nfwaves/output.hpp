#pragma once

// CSV and JSON writers. Numbers are printed with 17 significant digits in
// the C locale so the files round-trip bit for bit.

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"

namespace nfwaves {

std::string format_number(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t width_;
};

void write_json(const std::string& path, const nlohmann::json& j);

/// Creates the directory (and parents) if missing.
void ensure_dir(const std::string& path);

/// path joined with name.
std::string join_path(const std::string& dir, const std::string& name);

}  // namespace nfwaves
