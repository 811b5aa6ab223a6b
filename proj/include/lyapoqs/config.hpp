#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lyapoqs/lyapunov.hpp"
#include "lyapoqs/observables.hpp"

namespace lyapoqs {

struct TimeGrid {
  double t_min = 0.0;  // first point of a log grid; ignored for linear grids
  double t_max = 10.0;
  int n_points = 101;
  std::string spacing = "linear";  // linear | log
  std::vector<double> points() const;
};

struct TwoTimeSpec {
  double t = 0.0;
  TimeGrid taus{0.0, 10.0, 101, "linear"};
  std::vector<std::pair<int, int>> entries;  // empty: every entry
};

struct SystemSpec {
  CMatrix h;
  std::vector<BathAttachment> baths;
  double epsilon = 0.1;
  Statistics statistics = Statistics::Fermionic;
  std::string energy_unit = "arbitrary";
};

struct RunConfig {
  bool has_system = false;
  SystemSpec system;
  bool has_resonant_level = false;
  ResonantLevelParams resonant_level;
  Level level = Level::LevelI;
  TimeGrid times;
  CMatrix c0;  // empty: vacuum
  TwoTimeSpec two_time;
  QuadOptions quad;
  double pert_threshold = 10.0;
  int conductance_r = 0;
  int conductance_s = -1;  // -1: last site
  std::string output_dir = ".";
  std::string resolved_json;  // fully resolved config including defaults
};

// Strict parsing: unknown keys and wrong types throw Error(Config) naming the key.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

Level parse_level(const std::string& name);
OpenSystem build_open_system(const RunConfig& cfg);
CMatrix initial_correlation(const RunConfig& cfg, int n);

// Plain CSV with one header row; `comments` are written first as "# ..." lines.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string format_number(double x);
void write_csv(const std::string& path, const CsvTable& table);
void write_text(const std::string& path, const std::string& text);

// Column names "ReC_l_m" / "ImC_l_m" for the given prefix.
void append_matrix_columns(CsvTable& t, const std::string& prefix, int n);
void append_matrix_values(std::vector<double>& row, const CMatrix& m);

}  // namespace lyapoqs
