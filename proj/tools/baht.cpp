// Command line front end: time series and spectra, averaged-Hamiltonian
// norms, fidelity and coupling sweeps, rapid-echo verification and the
// convergence check. Data files are byte-deterministic for fixed inputs;
// wall-clock time appears only in the manifest.

#include <CLI11.hpp>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "baht/baht.hpp"

using namespace baht;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write file: " + path);
  out << text;
}

void write_manifest(const std::string& out_prefix, const std::string& command,
                    const json& parameters, std::uint64_t seed) {
  json m;
  m["command"] = command;
  m["parameters"] = parameters;
  m["seed"] = seed;
  m["tool_version"] = kVersion;
  char stamp[64];
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  m["timestamp"] = stamp;
  write_text(out_prefix + ".manifest.json", m.dump(2) + "\n");
}

// Minimal self-contained polyline plot, one line per labeled series.
void write_svg(const std::string& path, const std::string& title,
               const std::vector<std::string>& labels,
               const std::vector<std::vector<double>>& xs,
               const std::vector<std::vector<double>>& ys) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (size_t s = 0; s < xs.size(); ++s)
    for (size_t i = 0; i < xs[s].size(); ++i) {
      xmin = std::min(xmin, xs[s][i]);
      xmax = std::max(xmax, xs[s][i]);
      ymin = std::min(ymin, ys[s][i]);
      ymax = std::max(ymax, ys[s][i]);
    }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  const double w = 900, h = 500, ml = 70, mr = 20, mt = 40, mb = 50;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"500\" "
                    "viewBox=\"0 0 900 500\">\n<rect width=\"900\" height=\"500\" "
                    "fill=\"white\"/>\n";
  svg += "<text x=\"450\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + title + "</text>\n";
  svg += "<rect x=\"" + fmt(ml) + "\" y=\"" + fmt(mt) + "\" width=\"" + fmt(w - ml - mr) +
         "\" height=\"" + fmt(h - mt - mb) + "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (int g = 0; g <= 4; ++g) {
    double xv = xmin + g * (xmax - xmin) / 4, yv = ymin + g * (ymax - ymin) / 4;
    svg += "<text x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(h - mb + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           fmt(xv) + "</text>\n";
    svg += "<text x=\"" + fmt(ml - 6) + "\" y=\"" + fmt(py(yv) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fmt(yv) +
           "</text>\n";
  }
  for (size_t s = 0; s < xs.size(); ++s) {
    std::string pts;
    for (size_t i = 0; i < xs[s].size(); ++i)
      pts += fmt(px(xs[s][i])) + "," + fmt(py(ys[s][i])) + " ";
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
           colors[s % 6] + "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + fmt(w - mr - 8) + "\" y=\"" + fmt(mt + 18 + 16 * s) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" +
           colors[s % 6] + "\">" + labels[s] + "</text>\n";
  }
  svg += "</svg>\n";
  write_text(path, svg);
}

PulseSequence load_sequence(const std::string& seq_name, const std::string& seq_file,
                            double tau_ns) {
  if (!seq_file.empty()) return parse_sequence_file(seq_file);
  return builtin_sequence(seq_name, tau_ns * 1e-9);
}

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 2 || lo <= 0 || hi <= lo)
    throw InvalidArgument("grid needs points >= 2 and 0 < min < max");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
  return g;
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
  if (points < 2 || lo <= 0 || hi <= lo)
    throw InvalidArgument("grid needs points >= 2 and 0 < min < max");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
  return g;
}

OperatorMatrix detuning_hamiltonian(double delta_hz, int dim) {
  SpinBasis b = spin_operators(dim);
  return OperatorMatrix::hermitian(delta_hz * b.sz.mat());
}

Vector plus_x_state(int dim) {
  // ground state of -S_x: for dim 2 this is (1,1)/sqrt(2)
  SpinBasis b = spin_operators(dim);
  Eigen::SelfAdjointEigenSolver<Matrix> es(-b.sx.mat());
  Vector psi = es.eigenvectors().col(0);
  return psi;
}

int run_timeseries(const std::string& seq_name, const std::string& seq_file, double delta_hz,
                   double tau_ns, int periods, const std::string& prop, int spp,
                   const std::string& window_name, const std::string& observable,
                   const std::string& out, bool svg) {
  PulseSequence seq = load_sequence(seq_name, seq_file, tau_ns);
  OperatorMatrix h0 = detuning_hamiltonian(delta_hz, seq.dim());
  SpinBasis b = spin_operators(seq.dim());
  const OperatorMatrix& obs = observable == "y" ? b.sy : observable == "z" ? b.sz : b.sx;
  if (observable != "x" && observable != "y" && observable != "z")
    throw InvalidArgument("observable must be x, y or z");

  PropagatorChoice choice;
  if (prop == "exact") {
    choice = {PropagatorKind::Exact, 0};
  } else if (prop.rfind("aht:", 0) == 0) {
    choice = {PropagatorKind::Aht, std::stoi(prop.substr(4))};
    if (choice.order < 1) throw InvalidArgument("aht order must be >= 1");
  } else {
    throw InvalidArgument("--prop must be 'exact' or 'aht:M'");
  }
  Window window = window_name == "hann" ? Window::Hann : Window::Rect;
  if (window_name != "rect" && window_name != "hann")
    throw InvalidArgument("--window must be rect or hann");

  TimeSeries ts = stroboscopic_series(seq, h0, plus_x_state(seq.dim()), obs, periods, spp,
                                      choice);
  PowerSpectrum ps = power_spectrum(ts, window);

  std::string series_csv = "t_seconds,expectation\n";
  for (size_t i = 0; i < ts.times.size(); ++i)
    series_csv += fmt(ts.times[i]) + "," + fmt(ts.values[i]) + "\n";
  write_text(out + "_series.csv", series_csv);

  std::string spec_csv = "freq_hz,power\n";
  for (size_t i = 0; i < ps.freq_hz.size(); ++i)
    spec_csv += fmt(ps.freq_hz[i]) + "," + fmt(ps.power[i]) + "\n";
  write_text(out + "_spectrum.csv", spec_csv);

  if (svg) {
    write_svg(out + "_series.svg", "expectation vs time (s)", {"<" + observable + ">"},
              {ts.times}, {ts.values});
    write_svg(out + "_spectrum.svg", "one-sided power vs frequency (Hz)", {"power"},
              {ps.freq_hz}, {ps.power});
  }
  json params = {{"seq", seq.name()},       {"seq_file", seq_file},
                 {"delta_hz", delta_hz},    {"tau_ns", tau_ns},
                 {"periods", periods},      {"prop", prop},
                 {"samples_per_period", spp}, {"window", window_name},
                 {"observable", observable}, {"out", out}};
  write_manifest(out, "timeseries", params, 0);
  std::printf("wrote %s_series.csv (%zu samples), %s_spectrum.csv (%zu bins)\n", out.c_str(),
              ts.times.size(), out.c_str(), ps.freq_hz.size());
  return 0;
}

int run_fidelity(const std::string& seq_name, const std::string& seq_file, double delta_hz,
                 double tau_ns, const std::string& orders_arg, double t_min_us,
                 double t_max_us, int points, const std::string& out, bool svg) {
  PulseSequence seq = load_sequence(seq_name, seq_file, tau_ns);
  OperatorMatrix h0 = detuning_hamiltonian(delta_hz, seq.dim());
  std::vector<int> orders;
  for (const std::string& tok : CLI::detail::split(orders_arg, ','))
    orders.push_back(std::stoi(tok));
  std::vector<double> grid = linear_grid(t_min_us * 1e-6, t_max_us * 1e-6, points);
  std::vector<FidelityRow> rows =
      fidelity_sweep(seq, h0, plus_x_state(seq.dim()), orders, grid);

  std::string csv = "t_seconds,m,fidelity\n";
  for (const FidelityRow& r : rows)
    csv += fmt(r.t) + "," + std::to_string(r.order) + "," + fmt(r.fidelity) + "\n";
  write_text(out + "_fidelity.csv", csv);
  if (svg) {
    std::sort(orders.begin(), orders.end());
    std::vector<std::vector<double>> xs(orders.size()), ys(orders.size());
    std::vector<std::string> labels;
    for (size_t k = 0; k < orders.size(); ++k) labels.push_back("m=" + std::to_string(orders[k]));
    for (size_t i = 0; i < rows.size(); ++i) {
      xs[i % orders.size()].push_back(rows[i].t);
      ys[i % orders.size()].push_back(rows[i].fidelity);
    }
    write_svg(out + "_fidelity.svg", "fidelity vs total time (s)", labels, xs, ys);
  }
  json params = {{"seq", seq.name()},   {"seq_file", seq_file}, {"delta_hz", delta_hz},
                 {"tau_ns", tau_ns},    {"orders", orders_arg}, {"t_min_us", t_min_us},
                 {"t_max_us", t_max_us}, {"points", points},    {"out", out}};
  write_manifest(out, "fidelity", params, 0);
  std::printf("wrote %s_fidelity.csv (%zu rows)\n", out.c_str(), rows.size());
  return 0;
}

int run_norms(const std::string& seq_name, const std::string& seq_file, double delta_hz,
              double tau_ns, const std::string& orders_arg, double t_min_us, double t_max_us,
              int points, double budget, const std::string& out, bool svg) {
  PulseSequence seq = load_sequence(seq_name, seq_file, tau_ns);
  OperatorMatrix h0 = detuning_hamiltonian(delta_hz, seq.dim());
  std::vector<int> orders;
  for (const std::string& tok : CLI::detail::split(orders_arg, ','))
    orders.push_back(std::stoi(tok));
  MagnusParams params;
  params.m_max = kMaxSupportedOrder;
  params.budget_cap = budget;
  std::vector<double> grid = geometric_grid(t_min_us * 1e-6, t_max_us * 1e-6, points);
  std::vector<NormRow> rows = norm_scaling_sweep(seq, h0, orders, grid, params);

  std::string csv = "t_seconds,order,spectral_norm_hz\n";
  for (const NormRow& r : rows)
    csv += fmt(r.t) + "," + std::to_string(r.order) + "," + fmt(r.norm_hz) + "\n";
  write_text(out + "_norms.csv", csv);
  if (svg) {
    std::vector<std::vector<double>> xs(orders.size()), ys(orders.size());
    std::vector<std::string> labels;
    for (size_t k = 0; k < orders.size(); ++k)
      labels.push_back("order " + std::to_string(orders[k]));
    for (size_t i = 0; i < rows.size(); ++i) {
      xs[i % orders.size()].push_back(std::log10(rows[i].t));
      ys[i % orders.size()].push_back(
          std::log10(std::max(rows[i].norm_hz, 1e-300)));
    }
    write_svg(out + "_norms.svg", "log10 |term| (Hz) vs log10 t (s)", labels, xs, ys);
  }
  json jparams = {{"seq", seq.name()},    {"seq_file", seq_file}, {"delta_hz", delta_hz},
                  {"tau_ns", tau_ns},     {"orders", orders_arg}, {"t_min_us", t_min_us},
                  {"t_max_us", t_max_us}, {"points", points},     {"budget", budget},
                  {"out", out}};
  write_manifest(out, "norms", jparams, 0);
  std::printf("wrote %s_norms.csv (%zu rows)\n", out.c_str(), rows.size());
  return 0;
}

int run_alpha(const std::string& seq_name, const std::string& seq_file, double delta_hz,
              double tau_ns, const std::string& pert, double t_min_us, double t_max_us,
              int points, const std::string& out, bool svg) {
  PulseSequence seq = load_sequence(seq_name, seq_file, tau_ns);
  OperatorMatrix h0 = detuning_hamiltonian(delta_hz, seq.dim());
  PerturbationKind kind;
  if (pert == "dc") {
    kind = PerturbationKind::DC;
  } else if (pert == "ac") {
    kind = PerturbationKind::ACSquare;
  } else {
    throw InvalidArgument("--pert must be dc or ac");
  }
  std::vector<double> grid = geometric_grid(t_min_us * 1e-6, t_max_us * 1e-6, points);
  std::vector<CouplingResult> rows = alpha_sweep(seq, h0, kind, grid);

  std::string csv = "t_seconds,alpha,a_x,a_y,a_z,epsilon_hz,method\n";
  for (const CouplingResult& r : rows)
    csv += fmt(r.t) + "," + fmt(r.alpha) + "," + fmt(r.components[0]) + "," +
           fmt(r.components[1]) + "," + fmt(r.components[2]) + "," + fmt(r.epsilon_used_hz) +
           "," + (r.method == CouplingMethod::Exact ? "exact" : "aht1") + "\n";
  write_text(out + "_alpha.csv", csv);
  if (svg) {
    std::vector<double> xs, ys;
    for (const CouplingResult& r : rows) {
      xs.push_back(std::log10(r.t));
      ys.push_back(r.alpha);
    }
    write_svg(out + "_alpha.svg", "alpha vs log10 t (s)", {"alpha"}, {xs}, {ys});
  }
  json params = {{"seq", seq.name()},    {"seq_file", seq_file}, {"delta_hz", delta_hz},
                 {"tau_ns", tau_ns},     {"pert", pert},         {"t_min_us", t_min_us},
                 {"t_max_us", t_max_us}, {"points", points},     {"out", out}};
  write_manifest(out, "alpha", params, 0);
  std::printf("wrote %s_alpha.csv (%zu rows)\n", out.c_str(), rows.size());
  return 0;
}

int run_echo_verify(int count, int pairs, int m_max, std::uint64_t seed, double tau,
                    const std::string& out) {
  if (count < 1) throw InvalidArgument("--count must be >= 1");
  std::vector<EchoReport> reports(count);
  parallel_for_index(count, [&](int i) {
    std::vector<FrameInterval> frames =
        random_echo_sequence(pairs, SplitMix64::substream(seed, 1000003ULL + i).next_u64(),
                             tau);
    reports[i] = verify_vanishing(frames, m_max);
  });
  double max_norm = 0;
  json failures = json::array();
  for (int i = 0; i < count; ++i) {
    max_norm = std::max(max_norm, reports[i].max_norm_hz);
    if (!reports[i].vanishes()) {
      failures.push_back({{"sequence", i},
                          {"max_norm_hz", reports[i].max_norm_hz},
                          {"note", reports[i].note}});
    }
  }
  json result = {{"seed", seed},
                 {"count", count},
                 {"n", 2 * pairs},
                 {"m_max", m_max},
                 {"max_norm_overall", max_norm},  // Hz
                 {"failures", failures}};
  write_text(out, result.dump(2) + "\n");
  std::printf("%d sequences, %d pairs each, orders 1..%d: max |term| %.3e Hz, %zu failure(s)\n",
              count, pairs, m_max, max_norm, failures.size());
  return failures.empty() ? 0 : 3;
}

int run_check_convergence(const std::string& seq_name, const std::string& seq_file,
                          double delta_hz, double t_us) {
  PulseSequence seq = load_sequence(seq_name, seq_file, 1000.0);
  PulseSequence scaled = seq.scaled_to_total_time(t_us * 1e-6);
  OperatorMatrix h0 = detuning_hamiltonian(delta_hz, seq.dim());
  ConvergenceMargin m = convergence_margin(toggling_frames(scaled, h0));
  // report as Delta * t against the radius / pi form, both dimensionless
  double lhs = 2.0 * m.lhs;
  double bound = 2.0 * m.bound;
  if (m.guaranteed)
    std::printf("guaranteed (%.3f < %.3f)\n", lhs, bound);
  else
    std::printf("not guaranteed (%.3f >= %.3f)\n", lhs, bound);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulsed-sequence analysis: averaged Hamiltonians, spectra, coupling factors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string seq_name = "ramsey", seq_file, out = "baht_out";
  double delta_hz = 1e5, tau_ns = 1000.0;
  bool svg = false;

  auto add_common = [&](CLI::App* sub, bool with_out = true) {
    sub->add_option("--seq", seq_name, "built-in sequence name")->capture_default_str();
    sub->add_option("--seq-file", seq_file, "sequence file (overrides --seq)");
    sub->add_option("--delta-hz", delta_hz, "detuning of H0 = delta * S_z, in Hz")
        ->capture_default_str();
    sub->add_option("--tau-ns", tau_ns, "base interval in ns")->capture_default_str();
    if (with_out) {
      sub->add_option("--out", out, "output prefix")->capture_default_str();
      sub->add_flag("--svg", svg, "also write SVG plots");
    }
  };

  auto* ts = app.add_subcommand("timeseries", "stroboscopic expectation and its spectrum");
  int periods = 64, spp = 1;
  std::string prop = "exact", window_name = "rect", observable = "x";
  add_common(ts);
  ts->add_option("--periods", periods, "number of repeated periods")->capture_default_str();
  ts->add_option("--prop", prop, "'exact' or 'aht:M'")->capture_default_str();
  ts->add_option("--samples-per-period", spp, "must divide the period's unit count")
      ->capture_default_str();
  ts->add_option("--window", window_name, "rect or hann")->capture_default_str();
  ts->add_option("--observable", observable, "x, y or z")->capture_default_str();

  auto* fid = app.add_subcommand("fidelity", "exact vs averaged-propagator fidelity sweep");
  std::string orders_arg = "1,3";
  double t_min_us = 0.1, t_max_us = 10.0;
  int points = 50;
  add_common(fid);
  fid->add_option("--orders", orders_arg, "comma-separated truncation orders")
      ->capture_default_str();
  fid->add_option("--t-min-us", t_min_us)->capture_default_str();
  fid->add_option("--t-max-us", t_max_us)->capture_default_str();
  fid->add_option("--points", points)->capture_default_str();

  auto* nrm = app.add_subcommand("norms", "averaged-term norms over a geometric time grid");
  double budget = 2e8;
  add_common(nrm);
  nrm->add_option("--orders", orders_arg, "comma-separated orders")->capture_default_str();
  nrm->add_option("--t-min-us", t_min_us)->capture_default_str();
  nrm->add_option("--t-max-us", t_max_us)->capture_default_str();
  nrm->add_option("--points", points)->capture_default_str();
  nrm->add_option("--budget", budget, "matrix-product budget cap")->capture_default_str();

  auto* al = app.add_subcommand("alpha", "sensor coupling factor over total time");
  std::string pert = "dc";
  add_common(al);
  al->add_option("--pert", pert, "dc or ac")->capture_default_str();
  al->add_option("--t-min-us", t_min_us)->capture_default_str();
  al->add_option("--t-max-us", t_max_us)->capture_default_str();
  al->add_option("--points", points)->capture_default_str();

  auto* ev = app.add_subcommand("echo-verify", "random rapid-echo vanishing verification");
  int count = 100, pairs = 10, m_max = 5;
  std::uint64_t seed = 1;
  double tau_s = 0.01;
  std::string echo_out = "echo_verify.json";
  ev->add_option("--count", count, "number of random sequences")->capture_default_str();
  ev->add_option("--pairs", pairs, "echo pairs per sequence")->capture_default_str();
  ev->add_option("--m-max", m_max, "highest order checked")->capture_default_str();
  ev->add_option("--seed", seed, "random seed")->capture_default_str();
  ev->add_option("--tau", tau_s, "frame duration in seconds")->capture_default_str();
  ev->add_option("--out", echo_out, "result JSON path")->capture_default_str();

  auto* cc = app.add_subcommand("check-convergence", "sufficient-condition margin");
  double t_us = 1.0;
  add_common(cc, false);
  cc->add_option("--t-us", t_us, "total time in microseconds")->capture_default_str();

  try {
    app.parse(argc, argv);
    if (ts->parsed())
      return run_timeseries(seq_name, seq_file, delta_hz, tau_ns, periods, prop, spp,
                            window_name, observable, out, svg);
    if (fid->parsed())
      return run_fidelity(seq_name, seq_file, delta_hz, tau_ns, orders_arg, t_min_us,
                          t_max_us, points, out, svg);
    if (nrm->parsed())
      return run_norms(seq_name, seq_file, delta_hz, tau_ns, orders_arg, t_min_us, t_max_us,
                       points, budget, out, svg);
    if (al->parsed())
      return run_alpha(seq_name, seq_file, delta_hz, tau_ns, pert, t_min_us, t_max_us,
                       points, out, svg);
    if (ev->parsed()) return run_echo_verify(count, pairs, m_max, seed, tau_s, echo_out);
    if (cc->parsed()) return run_check_convergence(seq_name, seq_file, delta_hz, t_us);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.error_class() == ErrorClass::Usage ? 2 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
