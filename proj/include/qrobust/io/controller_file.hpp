#pragma once

// Plain-text controller files: a '#'-prefixed key/value header followed by the
// M x kappa amplitude table, one control per line.
//
//   # qrobust-controller 1
//   # system_hash 5c3e0a9d1f2b7e44
//   # seed 1
//   # restart 17
//   # restart_seed 10553347866212431937
//   # nominal_error 0.0012345678901234567
//   # iterations 812
//   # status target-reached
//   # shape 2 32
//   0.12345678901234568 -0.5 ...

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "qrobust/errors.hpp"
#include "qrobust/io/csv.hpp"
#include "qrobust/system.hpp"

namespace qrobust::io {

/// FNV-1a over the raw bytes of the system definition and the target, so a
/// controller file can be matched to the experiment that produced it.
class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void integer(std::int64_t v) { bytes(&v, sizeof v); }
  void real(double v) {
    if (v == 0.0) v = 0.0;  // fold -0
    bytes(&v, sizeof v);
  }
  void matrix(const ComplexMatrix& m) {
    integer(m.rows());
    integer(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        real(m(i, j).real());
        real(m(i, j).imag());
      }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t system_hash(const ControlSystem& sys, const ComplexMatrix& target) {
  Fnv1a h;
  h.integer(sys.dimension());
  h.integer(sys.num_controls());
  h.integer(sys.steps());
  h.real(sys.step_length());
  h.matrix(sys.drift());
  for (const auto& m : sys.interactions()) h.matrix(m);
  h.matrix(target);
  return h.value();
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct ControllerFile {
  std::uint64_t system_hash = 0;
  std::uint64_t seed = 0;
  int restart = 0;
  std::uint64_t restart_seed = 0;
  double nominal_error = 0.0;
  int iterations = 0;
  std::string status;
  PulseSequence pulse;
};

inline std::string to_text(const ControllerFile& c) {
  const auto& f = c.pulse.amplitudes();
  std::ostringstream os;
  os << "# qrobust-controller 1\n"
     << "# system_hash " << hex64(c.system_hash) << "\n"
     << "# seed " << c.seed << "\n"
     << "# restart " << c.restart << "\n"
     << "# restart_seed " << c.restart_seed << "\n"
     << "# nominal_error " << format_double(c.nominal_error) << "\n"
     << "# iterations " << c.iterations << "\n"
     << "# status " << c.status << "\n"
     << "# shape " << f.rows() << " " << f.cols() << "\n";
  for (Eigen::Index m = 0; m < f.rows(); ++m) {
    for (Eigen::Index k = 0; k < f.cols(); ++k) {
      if (k) os << ' ';
      os << format_double(f(m, k));
    }
    os << '\n';
  }
  return os.str();
}

inline ControllerFile parse_controller(const std::string& text, const std::string& source) {
  const auto fail = [&](const std::string& why) -> DataError {
    return DataError(source + ": corrupt controller file: " + why);
  };
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::string> header;
  std::vector<std::string> body;
  bool magic = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key, value;
      ls >> key;
      std::getline(ls >> std::ws, value);
      if (key == "qrobust-controller") {
        if (value != "1") throw fail("unsupported version '" + value + "'");
        magic = true;
      } else {
        header[key] = value;
      }
    } else {
      body.push_back(line);
    }
  }
  if (!magic) throw fail("missing '# qrobust-controller' line");
  const auto get = [&](const std::string& key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end()) throw fail("missing header field '" + key + "'");
    return it->second;
  };
  const auto to_u64 = [&](const std::string& key, int base) {
    const auto& s = get(key);
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw fail("bad value for '" + key + "'");
    return v;
  };
  const auto to_int = [&](const std::string& key) {
    const auto& s = get(key);
    int v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw fail("bad value for '" + key + "'");
    return v;
  };

  ControllerFile c;
  c.system_hash = to_u64("system_hash", 16);
  c.seed = to_u64("seed", 10);
  c.restart = to_int("restart");
  c.restart_seed = to_u64("restart_seed", 10);
  if (!parse_double(get("nominal_error"), c.nominal_error)) throw fail("bad value for 'nominal_error'");
  c.iterations = to_int("iterations");
  c.status = get("status");

  std::istringstream shape(get("shape"));
  int rows = -1, cols = -1;
  shape >> rows >> cols;
  if (!shape || rows < 1 || cols < 1) throw fail("bad shape");
  if (static_cast<int>(body.size()) != rows) {
    throw fail("expected " + std::to_string(rows) + " amplitude rows, found " + std::to_string(body.size()));
  }
  RealMatrix f(rows, cols);
  for (int m = 0; m < rows; ++m) {
    std::istringstream ls(body[static_cast<std::size_t>(m)]);
    std::string tok;
    int k = 0;
    while (ls >> tok) {
      double v = 0.0;
      if (k >= cols || !parse_double(tok, v) || !std::isfinite(v)) {
        throw fail("bad amplitude on row " + std::to_string(m + 1));
      }
      f(m, k++) = v;
    }
    if (k != cols) throw fail("row " + std::to_string(m + 1) + " has " + std::to_string(k) + " amplitudes");
  }
  c.pulse = PulseSequence(std::move(f));
  return c;
}

inline void write_controller(const std::string& path, const ControllerFile& c) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << to_text(c);
  if (!f) throw DataError("write failed: " + path);
}

inline ControllerFile read_controller(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open controller file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_controller(ss.str(), path);
}

}  // namespace qrobust::io
