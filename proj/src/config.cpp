#include "lyapoqs/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "lyapoqs/errors.hpp"

namespace lyapoqs {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

// Object reader that remembers which keys were used.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(fmt::format("'{}' must be an object", path_.empty() ? "<root>" : path_));
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    if (!j_.contains(key)) fail(fmt::format("missing required key '{}'", key_path(key)));
    used_.insert(key);
    return j_.at(key);
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(fmt::format("key '{}' must be a number", key_path(key)));
    return v.get<double>();
  }
  double number(const std::string& key, double def) { return has(key) ? number(key) : def; }

  int integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(fmt::format("key '{}' must be an integer", key_path(key)));
    return v.get<int>();
  }
  int integer(const std::string& key, int def) { return has(key) ? integer(key) : def; }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(fmt::format("key '{}' must be a string", key_path(key)));
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& def) { return has(key) ? string(key) : def; }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) fail(fmt::format("key '{}' must be an array of numbers", key_path(key)));
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(fmt::format("key '{}' must be an array of numbers", key_path(key)));
      out.push_back(x.get<double>());
    }
    return out;
  }

  Reader child(const std::string& key) { return Reader(raw(key), key_path(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(fmt::format("unknown key '{}'", key_path(it.key())));
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

RMatrix read_real_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(fmt::format("key '{}' must be a non-empty array of rows", path));
  const std::size_t n = v.size();
  RMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!v[i].is_array() || v[i].size() != n) fail(fmt::format("key '{}' must be a square matrix", path));
    for (std::size_t j = 0; j < n; ++j) {
      if (!v[i][j].is_number()) fail(fmt::format("key '{}' must contain numbers", path));
      m(i, j) = v[i][j].get<double>();
    }
  }
  return m;
}

json matrix_json(const RMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

TimeGrid read_grid(Reader r, double def_max, int def_n) {
  TimeGrid g;
  g.t_max = r.number("t_max", def_max);
  g.n_points = r.integer("n_points", def_n);
  g.spacing = r.string("spacing", "linear");
  g.t_min = r.number("t_min", g.spacing == "log" ? 1e-3 * g.t_max : 0.0);
  r.finish();
  if (g.spacing != "linear" && g.spacing != "log")
    fail(fmt::format("key '{}' must be 'linear' or 'log'", r.key_path("spacing")));
  if (!(g.t_max >= 0.0) || g.n_points < 1) fail(fmt::format("invalid time grid at '{}'", r.key_path("t_max")));
  if (g.spacing == "log" && !(g.t_min > 0.0 && g.t_min <= g.t_max))
    fail(fmt::format("key '{}' must lie in (0, t_max]", r.key_path("t_min")));
  return g;
}

json grid_json(const TimeGrid& g) {
  return json{{"t_min", g.t_min}, {"t_max", g.t_max}, {"n_points", g.n_points}, {"spacing", g.spacing}};
}

SpectralFunction read_spectral(Reader r, const std::string& base_dir, json& out) {
  const std::string type = r.string("type");
  out["type"] = type;
  if (type == "wide_band") {
    const double g = r.number("gamma");
    r.finish();
    out["gamma"] = g;
    return SpectralFunction::wide_band(g);
  }
  if (type == "lorentzian") {
    const double g = r.number("gamma"), c = r.number("center", 0.0), w = r.number("width");
    r.finish();
    out["gamma"] = g;
    out["center"] = c;
    out["width"] = w;
    return SpectralFunction::lorentzian(g, c, w);
  }
  if (type == "ohmic_exp") {
    const double k = r.number("coupling"), wc = r.number("cutoff"), s = r.number("power", 1.0);
    r.finish();
    out["coupling"] = k;
    out["cutoff"] = wc;
    out["power"] = s;
    return SpectralFunction::ohmic_exp(k, wc, s);
  }
  if (type == "tabulated") {
    if (r.has("file")) {
      std::filesystem::path p = r.string("file");
      r.finish();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      out["file"] = p.string();
      return SpectralFunction::tabulated_csv(p.string());
    }
    const auto w = r.numbers("omega");
    const auto v = r.numbers("values");
    r.finish();
    out["omega"] = w;
    out["values"] = v;
    return SpectralFunction::tabulated(w, v);
  }
  fail(fmt::format("key '{}' has unknown spectral type '{}'", r.key_path("type"), type));
}

SystemSpec read_system(Reader r, const std::string& base_dir, json& out) {
  SystemSpec s;
  const std::string stats = r.string("statistics", "fermion");
  if (stats == "fermion") s.statistics = Statistics::Fermionic;
  else if (stats == "boson") s.statistics = Statistics::Bosonic;
  else fail(fmt::format("key '{}' must be 'fermion' or 'boson'", r.key_path("statistics")));
  s.epsilon = r.number("epsilon");
  s.energy_unit = r.string("energy_unit", "arbitrary");

  Reader h = r.child("hamiltonian");
  json hout = json::object();
  if (h.has("chain")) {
    Reader c = h.child("chain");
    const auto onsite = c.numbers("onsite");
    const auto hopping = c.numbers("hopping");
    c.finish();
    if (onsite.empty() || hopping.size() + 1 != onsite.size())
      fail(fmt::format("key '{}' needs N onsite energies and N-1 hoppings", h.key_path("chain")));
    s.h = tridiagonal_hamiltonian(onsite, hopping);
    hout["chain"] = {{"onsite", onsite}, {"hopping", hopping}};
  } else {
    const RMatrix re = read_real_matrix(h.raw("real"), h.key_path("real"));
    RMatrix im = RMatrix::Zero(re.rows(), re.cols());
    if (h.has("imag")) {
      im = read_real_matrix(h.raw("imag"), h.key_path("imag"));
      if (im.rows() != re.rows()) fail(fmt::format("key '{}' must match the real part", h.key_path("imag")));
    }
    s.h = re.cast<cplx>() + kI * im.cast<cplx>();
    hout["real"] = matrix_json(re);
    hout["imag"] = matrix_json(im);
  }
  h.finish();

  json bout = json::array();
  const json& baths = r.raw("baths");
  if (!baths.is_array()) fail(fmt::format("key '{}' must be an array", r.key_path("baths")));
  for (std::size_t i = 0; i < baths.size(); ++i) {
    Reader b(baths[i], fmt::format("{}[{}]", r.key_path("baths"), i));
    json bj = json::object();
    BathAttachment a{0, SpectralFunction::wide_band(0.0), 1.0, 0.0, s.statistics};
    a.site = b.integer("site");
    a.beta = b.number("beta");
    a.mu = b.number("mu", 0.0);
    json sj = json::object();
    a.spectral = read_spectral(b.child("spectral"), base_dir, sj);
    b.finish();
    bj["site"] = a.site;
    bj["beta"] = a.beta;
    bj["mu"] = a.mu;
    bj["spectral"] = sj;
    bout.push_back(bj);
    s.baths.push_back(a);
  }
  r.finish();
  out = json{{"statistics", stats}, {"epsilon", s.epsilon}, {"energy_unit", s.energy_unit},
             {"hamiltonian", hout}, {"baths", bout}};
  return s;
}

std::string dirname_of(const std::string& path) {
  const auto p = std::filesystem::path(path).parent_path();
  return p.empty() ? "." : p.string();
}

}  // namespace

std::vector<double> TimeGrid::points() const {
  std::vector<double> out(n_points);
  if (n_points == 1) {
    out[0] = t_max;
    return out;
  }
  for (int i = 0; i < n_points; ++i) {
    const double f = static_cast<double>(i) / (n_points - 1);
    out[i] = spacing == "log" ? t_min * std::pow(t_max / t_min, f) : t_min + (t_max - t_min) * f;
  }
  out.back() = t_max;
  return out;
}

Level parse_level(const std::string& name) {
  if (name == "first") return Level::FirstMarkov;
  if (name == "l1") return Level::LevelI;
  if (name == "l2") return Level::LevelII;
  throw Error(ErrorKind::Config, fmt::format("unknown level '{}' (expected first, l1 or l2)", name));
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(fmt::format("malformed JSON: {}", e.what()));
  }
  Reader r(root, "");
  RunConfig cfg;
  json out = json::object();

  if (r.has("system_file")) {
    std::filesystem::path p = r.string("system_file");
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    std::ifstream in(p);
    if (!in) fail(fmt::format("cannot open system_file '{}'", p.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    json sys;
    try {
      sys = json::parse(ss.str());
    } catch (const json::parse_error& e) {
      fail(fmt::format("malformed JSON in system_file: {}", e.what()));
    }
    json sout;
    cfg.system = read_system(Reader(sys, "system_file"), dirname_of(p.string()), sout);
    cfg.has_system = true;
    out["system"] = sout;
    if (r.has("system")) fail("keys 'system' and 'system_file' are exclusive");
  } else if (r.has("system")) {
    json sout;
    cfg.system = read_system(r.child("system"), base_dir, sout);
    cfg.has_system = true;
    out["system"] = sout;
  }

  if (r.has("resonant_level")) {
    Reader p = r.child("resonant_level");
    auto& q = cfg.resonant_level;
    q.eps0 = p.number("eps0", 0.0);
    q.gamma_l = p.number("gamma_l");
    q.gamma_r = p.number("gamma_r");
    q.beta_l = p.number("beta_l");
    q.beta_r = p.number("beta_r");
    q.mu_l = p.number("mu_l", 0.0);
    q.mu_r = p.number("mu_r", 0.0);
    p.finish();
    cfg.has_resonant_level = true;
    out["resonant_level"] = {{"eps0", q.eps0},     {"gamma_l", q.gamma_l}, {"gamma_r", q.gamma_r},
                             {"beta_l", q.beta_l}, {"beta_r", q.beta_r},   {"mu_l", q.mu_l},
                             {"mu_r", q.mu_r}};
  }

  const std::string level = r.string("level", "l1");
  cfg.level = parse_level(level);
  out["level"] = level;

  cfg.times = r.has("time_grid") ? read_grid(r.child("time_grid"), 10.0, 101) : TimeGrid{};
  out["time_grid"] = grid_json(cfg.times);

  if (r.has("initial")) {
    Reader in = r.child("initial");
    const std::string type = in.string("type", "vacuum");
    json ij = {{"type", type}};
    if (type == "matrix") {
      const RMatrix re = read_real_matrix(in.raw("real"), in.key_path("real"));
      RMatrix im = RMatrix::Zero(re.rows(), re.cols());
      if (in.has("imag")) im = read_real_matrix(in.raw("imag"), in.key_path("imag"));
      cfg.c0 = re.cast<cplx>() + kI * im.cast<cplx>();
      ij["real"] = matrix_json(re);
      ij["imag"] = matrix_json(im);
    } else if (type == "diagonal") {
      const auto d = in.numbers("occupations");
      cfg.c0 = CMatrix::Zero(d.size(), d.size());
      for (std::size_t i = 0; i < d.size(); ++i) cfg.c0(i, i) = d[i];
      ij["occupations"] = d;
    } else if (type != "vacuum") {
      fail(fmt::format("key '{}' must be vacuum, diagonal or matrix", in.key_path("type")));
    }
    in.finish();
    out["initial"] = ij;
  } else {
    out["initial"] = {{"type", "vacuum"}};
  }

  if (r.has("two_time")) {
    Reader t = r.child("two_time");
    cfg.two_time.t = t.number("t", 0.0);
    if (t.has("taus")) cfg.two_time.taus = read_grid(t.child("taus"), 10.0, 101);
    if (t.has("entries")) {
      const json& e = t.raw("entries");
      if (!e.is_array()) fail(fmt::format("key '{}' must be an array of [l, m] pairs", t.key_path("entries")));
      for (const auto& pr : e) {
        if (!pr.is_array() || pr.size() != 2 || !pr[0].is_number_integer() || !pr[1].is_number_integer())
          fail(fmt::format("key '{}' must be an array of [l, m] pairs", t.key_path("entries")));
        cfg.two_time.entries.emplace_back(pr[0].get<int>(), pr[1].get<int>());
      }
    }
    t.finish();
  }
  {
    json e = json::array();
    for (const auto& [l, m] : cfg.two_time.entries) e.push_back({l, m});
    out["two_time"] = {{"t", cfg.two_time.t}, {"taus", grid_json(cfg.two_time.taus)}, {"entries", e}};
  }

  if (r.has("quadrature")) {
    Reader q = r.child("quadrature");
    cfg.quad.abs_tol = q.number("abs_tol", cfg.quad.abs_tol);
    cfg.quad.rel_tol = q.number("rel_tol", cfg.quad.rel_tol);
    cfg.quad.max_intervals = q.integer("max_intervals", cfg.quad.max_intervals);
    q.finish();
    if (!(cfg.quad.abs_tol > 0.0) || !(cfg.quad.rel_tol >= 0.0) || cfg.quad.max_intervals < 1)
      fail("key 'quadrature' has invalid tolerances");
  }
  out["quadrature"] = {{"abs_tol", cfg.quad.abs_tol}, {"rel_tol", cfg.quad.rel_tol},
                       {"max_intervals", cfg.quad.max_intervals}};

  if (r.has("perturbative")) {
    Reader p = r.child("perturbative");
    cfg.pert_threshold = p.number("threshold", cfg.pert_threshold);
    p.finish();
  }
  out["perturbative"] = {{"threshold", cfg.pert_threshold}};

  if (r.has("conductance")) {
    Reader c = r.child("conductance");
    cfg.conductance_r = c.integer("r", 0);
    cfg.conductance_s = c.integer("s", -1);
    c.finish();
  }
  out["conductance"] = {{"r", cfg.conductance_r}, {"s", cfg.conductance_s}};

  cfg.output_dir = r.string("output_dir", ".");
  out["output_dir"] = cfg.output_dir;
  r.finish();
  cfg.resolved_json = out.dump(2);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, fmt::format("cannot open config '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), dirname_of(path));
}

OpenSystem build_open_system(const RunConfig& cfg) {
  if (cfg.has_system)
    return build_system(cfg.system.h, cfg.system.baths, cfg.system.epsilon, cfg.system.statistics);
  if (cfg.has_resonant_level) return resonant_level_system(cfg.resonant_level);
  throw Error(ErrorKind::Config, "config needs a 'system', 'system_file' or 'resonant_level' section");
}

CMatrix initial_correlation(const RunConfig& cfg, int n) {
  if (cfg.c0.size() == 0) return CMatrix::Zero(n, n);
  if (cfg.c0.rows() != n) throw Error(ErrorKind::Config, "key 'initial' has the wrong dimension");
  if (hermiticity_defect(cfg.c0) > 1e-12) throw Error(ErrorKind::Config, "key 'initial' must be Hermitian");
  return cfg.c0;
}

std::string format_number(double x) {
  if (x == 0.0) return "0";  // folds -0
  return fmt::format("{:.17g}", x);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Config, fmt::format("cannot write '{}'", path));
  out << text;
}

void write_csv(const std::string& path, const CsvTable& t) {
  std::string s;
  for (const auto& c : t.comments) s += "# " + c + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_number(row[i]);
    s += "\n";
  }
  write_text(path, s);
}

void append_matrix_columns(CsvTable& t, const std::string& prefix, int n) {
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) {
      t.columns.push_back(fmt::format("Re{}_{}_{}", prefix, l, m));
      t.columns.push_back(fmt::format("Im{}_{}_{}", prefix, l, m));
    }
}

void append_matrix_values(std::vector<double>& row, const CMatrix& m) {
  for (int l = 0; l < m.rows(); ++l)
    for (int c = 0; c < m.cols(); ++c) {
      row.push_back(m(l, c).real());
      row.push_back(m(l, c).imag());
    }
}

}  // namespace lyapoqs
