#pragma once

// Tables, reports and run configuration: CSV curves, JSON documents,
// raw field dumps and the flat key = value config format.

#include <bit>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ckn/analytic.hpp"
#include "ckn/continuation.hpp"
#include "ckn/error.hpp"

namespace ckn {

inline constexpr const char* kCurveHeader = "mu,Lambda,J,tau,nu,symmetric";

struct CurveTable {
  std::vector<CurvePoint> rows;
};

/// 17 significant digits, the shortest width that round-trips every double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Compact form for file names: 2.8 rather than 2.7999999999999998.
inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string format_curve(const CurveTable& t) {
  for (size_t i = 1; i < t.rows.size(); ++i)
    if (!(t.rows[i].mu > t.rows[i - 1].mu)) throw domain_error("curve table: mu must be strictly increasing");
  std::string out = kCurveHeader;
  out += '\n';
  for (const auto& r : t.rows) {
    out += format_double(r.mu) + ',' + format_double(r.Lambda) + ',' + format_double(r.J) + ',' +
           format_double(r.tau) + ',' + format_double(r.nu) + ',' + (r.symmetric ? "1" : "0") + '\n';
  }
  return out;
}

/// Write text with LF line endings; "-" is stdout. Parent directories are created.
inline void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fflush(stdout);
    return;
  }
  const std::filesystem::path fp(path);
  std::error_code ec;
  if (fp.has_parent_path()) std::filesystem::create_directories(fp.parent_path(), ec);
  std::ofstream f(fp, std::ios::binary | std::ios::trunc);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw io_error("write to '" + path + "' failed");
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

inline void write_curve(const CurveTable& t, const std::string& path) { write_text(path, format_curve(t)); }

inline CurveTable parse_curve(const std::string& text, const std::string& where = "<string>") {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kCurveHeader)
    throw io_error(where + ": missing header '" + std::string(kCurveHeader) + "'");
  CurveTable t;
  int n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    double v[5];
    const char* c = line.c_str();
    char* end = nullptr;
    for (double& x : v) {
      errno = 0;
      x = std::strtod(c, &end);
      if (end == c || *end != ',' || errno == ERANGE)
        throw io_error(where + ":" + std::to_string(n) + ": malformed row");
      c = end + 1;
    }
    if (std::strcmp(c, "0") != 0 && std::strcmp(c, "1") != 0)
      throw io_error(where + ":" + std::to_string(n) + ": symmetric flag must be 0 or 1");
    t.rows.push_back({v[0], v[1], v[2], v[3], v[4], c[0] == '1'});
  }
  return t;
}

inline CurveTable read_curve(const std::string& path) { return parse_curve(read_text(path), path); }

inline CurveTable to_table(const std::vector<CurvePoint>& pts) { return {pts}; }

/// Raw field: <base>.bin holds n_s x n_zeta little-endian doubles, row-major
/// in (s, zeta) over the full s grid; <base>.json describes the grid.
inline void write_field_dump(const BranchPoint& bp, const AngularBasis& basis, double p,
                             const std::string& base) {
  const auto& g = bp.field.grid;
  const Eigen::MatrixXd full = bp.field.full_values();
  std::string bytes;
  bytes.reserve(static_cast<size_t>(full.size()) * 8);
  for (int i = 0; i < full.rows(); ++i)
    for (int j = 0; j < full.cols(); ++j) {
      auto u = std::bit_cast<std::uint64_t>(full(i, j));
      if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
      char b[8];
      std::memcpy(b, &u, 8);
      bytes.append(b, 8);
    }
  nlohmann::json h;
  h["format"] = "float64";
  h["endianness"] = "little";
  h["order"] = "row-major (s, zeta)";
  h["n_s"] = g.n_s;
  h["n_zeta"] = g.n_zeta;
  h["S"] = g.S;
  h["s0"] = -g.S;
  h["ds"] = g.h();
  h["d"] = g.d;
  h["p"] = p;
  h["mu"] = bp.mu;
  h["tau"] = bp.tau;
  h["nu"] = bp.nu;
  h["symmetric"] = bp.symmetric;
  h["zeta"] = std::vector<double>(basis.zeta.data(), basis.zeta.data() + basis.n);
  h["zeta_weights"] = std::vector<double>(basis.weight.data(), basis.weight.data() + basis.n);
  h["data"] = std::filesystem::path(base + ".bin").filename().string();
  write_text(base + ".bin", bytes);
  write_text(base + ".json", h.dump(2) + "\n");
}

/// Reads a dump back as an (n_s x n_zeta) matrix.
inline Eigen::MatrixXd read_field_dump(const std::string& base) {
  const auto h = nlohmann::json::parse(read_text(base + ".json"));
  const int ns = h.at("n_s"), nz = h.at("n_zeta");
  const std::string bytes = read_text(base + ".bin");
  if (bytes.size() != static_cast<size_t>(ns) * nz * 8) throw io_error(base + ".bin: size does not match header");
  Eigen::MatrixXd out(ns, nz);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nz; ++j) {
      std::uint64_t u;
      std::memcpy(&u, bytes.data() + (static_cast<size_t>(i) * nz + j) * 8, 8);
      if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
      out(i, j) = std::bit_cast<double>(u);
    }
  return out;
}

// ---------------------------------------------------------------------------
// run configuration

struct MuRange {
  double start = 0.0, end = 0.0, step = 0.0;

  /// start + k step for k = 0.. while <= end (up to rounding).
  std::vector<double> values() const {
    std::vector<double> v;
    const long n = static_cast<long>(std::floor((end - start) / step + 1e-9));
    for (long k = 0; k <= n; ++k) v.push_back(start + k * step);
    return v;
  }
};

inline MuRange parse_mu_range(const std::string& s) {
  MuRange r;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%lf%c", &r.start, &r.end, &r.step, &tail) != 3)
    throw domain_error("mu range must be start:end:step, got '" + s + "'");
  if (!(r.start > 0.0 && r.end >= r.start && r.step > 0.0))
    throw domain_error("mu range needs 0 < start <= end and step > 0, got '" + s + "'");
  return r;
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw domain_error("cannot parse number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw domain_error("empty list");
  return out;
}

struct RunConfig {
  int d = 5;
  double p = 2.8;
  std::vector<double> thetas{1.0};
  std::optional<MuRange> mu;
  bool geometric = false;  // mu step is relative (continue)
  int n_s = 801;
  int n_zeta = 0;  // 0: grows with mu
  double zeta_factor = 7.0;
  double s_factor = 20.0;
  std::string out_dir;  // default from CKN_OUT_DIR, else "."
  std::string out;      // explicit output file ("-" for stdout)
  std::string name;     // figure name
  std::string chi_kind = "chi_0_pm1";
  bool dump_fields = false;

  /// Rejects parameters outside the admissible ranges before any compute.
  void validate() const {
    for (double th : thetas) ProblemParams(d, p, th);
    detail::require(p < critical_exponent(d), "p must be subcritical (p < 2* = " +
                                                  format_double(critical_exponent(d)) + ") for solvers");
    detail::require(n_s >= 9 && n_s % 2 == 1 && ((n_s - 1) / 2) % 2 == 0,
                    "n_s must be odd with (n_s-1)/2 even, and >= 9");
    detail::require(n_zeta == 0 || n_zeta >= 32, "n_zeta must be 0 (automatic) or >= 32");
    detail::require(zeta_factor > 0.0 && s_factor > 0.0, "grid factors must be positive");
  }

  std::string resolved_out_dir() const {
    if (!out_dir.empty()) return out_dir;
    if (const char* e = std::getenv("CKN_OUT_DIR"); e && *e) return e;
    return ".";
  }
};

inline bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw domain_error("not a boolean: '" + v + "'");
}

/// Apply one key = value setting; unknown keys are rejected.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& v) {
  auto num = [&](const std::string& s) {
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw domain_error("config key '" + key + "': not a number: '" + s + "'");
    return x;
  };
  auto integer = [&](const std::string& s) {
    const double x = num(s);
    if (x != std::floor(x)) throw domain_error("config key '" + key + "': not an integer: '" + s + "'");
    return static_cast<int>(x);
  };
  if (key == "d") c.d = integer(v);
  else if (key == "p") c.p = num(v);
  else if (key == "theta") c.thetas = parse_list(v);
  else if (key == "mu") c.mu = parse_mu_range(v);
  else if (key == "geometric") c.geometric = parse_bool(v);
  else if (key == "n_s") c.n_s = integer(v);
  else if (key == "n_zeta") c.n_zeta = integer(v);
  else if (key == "zeta_factor") c.zeta_factor = num(v);
  else if (key == "s_factor") c.s_factor = num(v);
  else if (key == "out_dir") c.out_dir = v;
  else if (key == "out") c.out = v;
  else if (key == "name") c.name = v;
  else if (key == "kind") c.chi_kind = v;
  else if (key == "dump_fields") c.dump_fields = parse_bool(v);
  else throw domain_error("unknown config key '" + key + "'");
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// Flat "key = value" lines; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text,
                                                                         const std::string& where) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream is(text);
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw domain_error(where + ":" + std::to_string(n) + ": expected key = value");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

inline void load_config(RunConfig& c, const std::string& path) {
  for (const auto& [k, v] : parse_config_text(read_text(path), path)) apply_setting(c, k, v);
}

}  // namespace ckn
