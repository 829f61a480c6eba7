#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "baht/errors.hpp"
#include "baht/sequence.hpp"

namespace baht {

// Sequence file grammar (line oriented; '#' starts a comment; blank lines
// are ignored; tokens are whitespace separated):
//
//   name <identifier>
//   dim <positive int>
//   base_unit_tau_ns <positive real>
//   pulse <ax> <ay> <az> <angle_rad> <duration_units>
//   frame <ax> <ay> <az> <sign> <duration_units>
//
// The three header fields must precede the first pulse/frame line. A file
// declares either pulses or frames, never both. Axes must be unit vectors to
// 1e-10; sign is +1 or -1; duration_units is a positive integer.

struct Diagnostic {
  int line = 0;    // 1-based
  int column = 0;  // 1-based
  std::string message;
};

class ParseError : public Error {
 public:
  explicit ParseError(Diagnostic diag)
      : Error(ErrorClass::Usage, format(diag)), diag_(std::move(diag)) {}
  const Diagnostic& diagnostic() const { return diag_; }

 private:
  static std::string format(const Diagnostic& d) {
    std::ostringstream os;
    os << d.line << ":" << d.column << ": " << d.message;
    return os.str();
  }
  Diagnostic diag_;
};

namespace detail {

struct Token {
  std::string text;
  int column;
};

inline std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

[[noreturn]] inline void fail(int line, int col, const std::string& msg) {
  throw ParseError(Diagnostic{line, col, msg});
}

inline double parse_real(const Token& t, int line) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(t.text, &pos);
  } catch (const std::exception&) {
    fail(line, t.column, "expected a number, got '" + t.text + "'");
  }
  if (pos != t.text.size()) fail(line, t.column, "trailing characters in number '" + t.text + "'");
  if (!std::isfinite(v)) fail(line, t.column, "number out of range");
  return v;
}

inline long parse_int(const Token& t, int line) {
  size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(t.text, &pos);
  } catch (const std::exception&) {
    fail(line, t.column, "expected an integer, got '" + t.text + "'");
  }
  if (pos != t.text.size()) fail(line, t.column, "trailing characters in integer '" + t.text + "'");
  return v;
}

}  // namespace detail

inline PulseSequence parse_sequence_text(const std::string& text) {
  using detail::fail;
  std::optional<std::string> name;
  std::optional<int> dim;
  std::optional<double> tau_ns;
  std::vector<Pulse> pulses;
  std::vector<FrameSpec> frames;
  std::vector<int> units;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::vector<detail::Token> tok = detail::tokenize(raw);
    if (tok.empty()) continue;
    const std::string& key = tok[0].text;
    auto need = [&](size_t count) {
      if (tok.size() != count + 1)
        fail(lineno, tok[0].column,
             "'" + key + "' expects " + std::to_string(count) + " fields, got " +
                 std::to_string(tok.size() - 1));
    };
    if (key == "name") {
      need(1);
      name = tok[1].text;
    } else if (key == "dim") {
      need(1);
      long d = detail::parse_int(tok[1], lineno);
      if (d < 2) fail(lineno, tok[1].column, "dim must be >= 2");
      dim = static_cast<int>(d);
    } else if (key == "base_unit_tau_ns") {
      need(1);
      double v = detail::parse_real(tok[1], lineno);
      if (v <= 0) fail(lineno, tok[1].column, "base_unit_tau_ns must be positive");
      tau_ns = v;
    } else if (key == "pulse" || key == "frame") {
      need(5);
      if (!name || !dim || !tau_ns)
        fail(lineno, tok[0].column, "name, dim and base_unit_tau_ns must precede '" + key + "'");
      if (key == "pulse" && !frames.empty())
        fail(lineno, tok[0].column, "file already declares frames; cannot mix in pulses");
      if (key == "frame" && !pulses.empty())
        fail(lineno, tok[0].column, "file already declares pulses; cannot mix in frames");
      Eigen::Vector3d axis(detail::parse_real(tok[1], lineno),
                           detail::parse_real(tok[2], lineno),
                           detail::parse_real(tok[3], lineno));
      if (std::abs(axis.norm() - 1.0) > 1e-10)
        fail(lineno, tok[1].column, "axis must be a unit vector");
      long dur = detail::parse_int(tok[5], lineno);
      if (dur < 1) fail(lineno, tok[5].column, "duration_units must be a positive integer");
      if (key == "pulse") {
        double angle = detail::parse_real(tok[4], lineno);
        pulses.push_back({axis, angle});
      } else {
        long sign = detail::parse_int(tok[4], lineno);
        if (sign != 1 && sign != -1) fail(lineno, tok[4].column, "sign must be +1 or -1");
        frames.push_back({axis, static_cast<int>(sign)});
      }
      units.push_back(static_cast<int>(dur));
    } else {
      fail(lineno, tok[0].column, "unknown directive '" + key + "'");
    }
  }
  if (!name) fail(lineno + 1, 1, "missing 'name'");
  if (!dim) fail(lineno + 1, 1, "missing 'dim'");
  if (!tau_ns) fail(lineno + 1, 1, "missing 'base_unit_tau_ns'");
  if (units.empty()) fail(lineno + 1, 1, "file declares no pulses or frames");
  double tau = *tau_ns * 1e-9;
  if (!pulses.empty())
    return PulseSequence::from_pulses(*name, *dim, tau, std::move(pulses), std::move(units));
  return PulseSequence::from_frames(*name, *dim, tau, std::move(frames), std::move(units));
}

inline PulseSequence parse_sequence_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw InvalidArgument("cannot open sequence file: " + path);
  std::string text;
  char buf[4096];
  size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, got);
  std::fclose(f);
  return parse_sequence_text(text);
}

inline std::string serialize_sequence(const PulseSequence& seq) {
  std::ostringstream os;
  char num[64];
  auto fmt = [&](double v) {
    std::snprintf(num, sizeof num, "%.17g", v);
    return std::string(num);
  };
  // The ns <-> s conversion rounds twice, so the nearest ns double may not
  // map back to the stored tau. Probe neighbours for an exact preimage; then
  // serialize(parse(text)) == text whenever a preimage exists.
  auto fmt_tau_ns = [&](double tau_s) {
    double ns = tau_s * 1e9;
    double lo = ns, hi = ns;
    for (int step = 0; step < 5; ++step) {
      for (double cand : {lo, hi})
        if (cand * 1e-9 == tau_s) return fmt(cand);
      lo = std::nextafter(lo, 0.0);
      hi = std::nextafter(hi, ns * 2);
    }
    return fmt(ns);
  };
  os << "name " << seq.name() << "\n";
  os << "dim " << seq.dim() << "\n";
  os << "base_unit_tau_ns " << fmt_tau_ns(seq.base_unit_tau()) << "\n";
  for (int k = 0; k < seq.n_intervals(); ++k) {
    if (seq.pulse_defined()) {
      const Pulse& p = seq.pulses()[k];
      os << "pulse " << fmt(p.axis.x()) << " " << fmt(p.axis.y()) << " " << fmt(p.axis.z())
         << " " << fmt(p.angle_rad) << " " << seq.duration_units()[k] << "\n";
    } else {
      const FrameSpec& f = seq.frame_table()[k];
      os << "frame " << fmt(f.axis.x()) << " " << fmt(f.axis.y()) << " " << fmt(f.axis.z())
         << " " << f.sign << " " << seq.duration_units()[k] << "\n";
    }
  }
  return os.str();
}

}  // namespace baht
