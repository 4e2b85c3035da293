#include "dlcz/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "dlcz/analysis.hpp"
#include "dlcz/angular_momentum.hpp"
#include "dlcz/collective.hpp"
#include "dlcz/errors.hpp"
#include "dlcz/event_log.hpp"
#include "dlcz/predictor.hpp"
#include "dlcz/simulator.hpp"

namespace dlcz::cli {

namespace {

using nlohmann::json;

// Scalars plus an optional table, rendered as text, JSON or CSV.
struct Report {
  std::vector<std::pair<std::string, json>> scalars;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  std::vector<std::string> text;  // human-readable layout; generic if empty
};

std::string cell(const json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

void render(const Report& r, const std::string& format, std::ostream& out) {
  if (format == "json") {
    json doc = json::object();
    for (const auto& [k, v] : r.scalars) doc[k] = v;
    if (!r.columns.empty()) {
      json rows = json::array();
      for (const auto& row : r.rows) {
        json obj = json::object();
        for (std::size_t c = 0; c < r.columns.size(); ++c) obj[r.columns[c]] = row[c];
        rows.push_back(obj);
      }
      doc["rows"] = rows;
    }
    out << doc.dump(2) << '\n';
    return;
  }
  if (format == "csv") {
    for (const auto& [k, v] : r.scalars) out << "# " << k << '=' << cell(v) << '\n';
    for (std::size_t c = 0; c < r.columns.size(); ++c) out << (c ? "," : "") << r.columns[c];
    if (!r.columns.empty()) out << '\n';
    for (const auto& row : r.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << cell(row[c]);
      out << '\n';
    }
    return;
  }
  if (!r.text.empty()) {
    for (const auto& line : r.text) out << line << '\n';
    return;
  }
  const auto short_cell = [](const json& v) {
    if (!v.is_number_float()) return cell(v);
    std::ostringstream s;
    s << std::setprecision(6) << v.get<double>();
    return s.str();
  };
  for (const auto& [k, v] : r.scalars) out << k << ": " << short_cell(v) << '\n';
  if (!r.columns.empty()) {
    out << '\n';
    for (std::size_t c = 0; c < r.columns.size(); ++c) out << ' ' << std::setw(15) << r.columns[c];
    out << '\n';
    for (const auto& row : r.rows) {
      for (const auto& v : row) out << ' ' << std::setw(15) << short_cell(v);
      out << '\n';
    }
  }
}

ChshAngles parse_angles(const std::string& text) {
  std::vector<double> deg;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != item.size()) throw std::invalid_argument("bad angle '" + item + "'");
    deg.push_back(v);
  }
  if (deg.size() != 4) {
    throw std::invalid_argument("--angles takes theta_s,theta_s',theta_i,theta_i' in degrees");
  }
  return {deg_to_rad(deg[0]), deg_to_rad(deg[1]), deg_to_rad(deg[2]), deg_to_rad(deg[3])};
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// Columns looked up by header name; '#' lines and blank lines skipped.
std::vector<std::map<std::string, double>> read_csv(const std::string& path,
                                                    const std::vector<std::string>& required) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path);
  std::vector<std::string> header;
  std::vector<std::map<std::string, double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (header.empty()) {
      header = fields;
      for (const auto& r : required) {
        if (std::find(header.begin(), header.end(), r) == header.end()) {
          throw ParseError(line_no, "CSV header lacks column '" + r + "'");
        }
      }
      continue;
    }
    if (fields.size() != header.size()) throw ParseError(line_no, "wrong number of CSV fields");
    std::map<std::string, double> row;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(fields[c], &used);
      } catch (const std::exception&) {
        used = std::string::npos;
      }
      if (used != fields[c].size()) {
        throw ParseError(line_no, "not a number: '" + fields[c] + "'");
      }
      row[header[c]] = v;
    }
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw ParseError(0, "CSV file " + path + " has no header");
  return rows;
}

double resolve_eta(double eta, double eta_pi4) {
  if (!std::isnan(eta_pi4)) return eta_pi4 * std::numbers::pi / 4;
  if (!std::isnan(eta)) return eta;
  return mixing_angle(kRubidium85Scheme);
}

Report cmd_eta(const std::string& fa, const std::string& fb, const std::string& fc) {
  const LevelScheme scheme{HalfInt::parse(fa), HalfInt::parse(fb), HalfInt::parse(fc)};
  const BranchingTable table(scheme);
  const Rational c2 = cos2_mixing_angle(table);
  const double eta = mixing_angle(table);
  Report r;
  r.scalars = {{"F_a", scheme.fa.to_string()},
               {"F_b", scheme.fb.to_string()},
               {"F_c", scheme.fc.to_string()},
               {"eta_rad", eta},
               {"eta_over_pi4", eta / (std::numbers::pi / 4)},
               {"cos2_eta", c2.convert_to<double>()},
               {"cos2_eta_exact", c2.str()}};
  r.columns = {"m", "alpha", "X", "X2_exact"};
  for (const auto& e : table.entries()) {
    r.rows.push_back({e.m.to_string(), e.alpha, e.amplitude.value(), e.amplitude.square.str()});
  }
  r.text.push_back("scheme: F_a=" + scheme.fa.to_string() + " F_c=" + scheme.fc.to_string() +
                   " F_b=" + scheme.fb.to_string());
  r.text.push_back("eta = " + fixed(eta, 6) + " rad = " + fixed(eta / (std::numbers::pi / 4), 5) +
                   " x pi/4");
  r.text.push_back("cos^2 eta = " + c2.str() + " = " + fixed(c2.convert_to<double>(), 6));
  r.text.push_back("");
  r.text.push_back("   m  alpha          X_m(alpha)   X^2");
  for (const auto& e : table.entries()) {
    std::ostringstream s;
    s << std::setw(4) << e.m.to_string() << std::setw(7) << e.alpha << std::setw(20)
      << fixed(e.amplitude.value(), 12) << "   " << e.amplitude.square.str();
    r.text.push_back(s.str());
  }
  return r;
}

Report cmd_predict_fringe(double eta, double theta_i_deg, double amplitude, double background,
                          int points) {
  const FringeModel model{eta, amplitude, background};
  model.validate();
  const double theta_i = deg_to_rad(theta_i_deg);
  Report r;
  r.scalars = {{"eta_rad", eta},
               {"theta_i_deg", theta_i_deg},
               {"visibility", fringe_visibility(model, theta_i)}};
  r.columns = {"theta_s_deg", "C"};
  for (int k = 0; k <= points; ++k) {
    const double deg = 180.0 * k / points;
    r.rows.push_back({deg, coincidence_rate(model, {deg_to_rad(deg), theta_i})});
  }
  return r;
}

Report cmd_predict_chsh(double eta, const ChshAngles& angles) {
  Report r;
  r.columns = {"theta_s_deg", "theta_i_deg", "E"};
  r.text.push_back("theta_s   theta_i   E(theta_s, theta_i)");
  for (const auto& s : angles.settings()) {
    const double e = ideal_correlation(eta, s);
    r.rows.push_back({rad_to_deg(s.theta_s), rad_to_deg(s.theta_i), e});
    std::ostringstream line;
    line << std::setw(7) << fixed(rad_to_deg(s.theta_s), 1) << std::setw(10)
         << fixed(rad_to_deg(s.theta_i), 1) << std::setw(12) << fixed(e, 4);
    r.text.push_back(line.str());
  }
  const double s = predict_ideal_S(eta, angles);
  r.scalars = {{"eta_rad", eta}, {"S", s}};
  r.text.push_back("S = " + fixed(s, 4));
  return r;
}

Report cmd_simulate(const std::string& config_path, const std::string& settings_path,
                    std::uint64_t n, std::uint64_t seed, const std::string& out_path,
                    unsigned threads, std::ostream& err) {
  const ExperimentConfig config =
      config_path.empty() ? ExperimentConfig::defaults() : read_config_file(config_path);
  const std::vector<SettingEntry> settings =
      settings_path.empty() ? chsh_settings() : read_settings_file(settings_path);
  for (const auto& w : config.warnings()) err << "warning: " << w << '\n';

  std::ofstream out(out_path);
  if (!out) throw ParseError(0, "cannot write " + out_path);
  const EventLogHeader header{config, settings, seed, n};
  EventLogWriter writer(out, header);
  SimulationOptions options;
  options.threads = threads;
  const auto tallies = stream_trials(config, settings, n, seed,
                                     [&](const DetectionEvent& e) { writer.write(e); }, options);
  out.close();
  if (!out) throw ParseError(0, "error while writing " + out_path);

  Report r;
  r.scalars = {{"log", out_path}, {"seed", seed}, {"trials_per_setting", n}};
  r.columns = {"setting", "theta_s_deg", "theta_i_deg", "trials", "singles_s", "singles_i",
               "coincidences"};
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const auto& t = tallies[k];
    r.rows.push_back({settings[k].id, settings[k].theta_s_deg, settings[k].theta_i_deg, t.trials,
                      t.signal_clicks, t.idler_clicks, t.coincidences});
  }
  return r;
}

Report cmd_analyze_chsh(const std::string& log_path, const ChshAngles& angles) {
  const EventLog log = parse_event_log_file(log_path);
  if (log.events.empty()) throw ParseError(0, "event log " + log_path + " contains no events");
  const ChshResult res = chsh_from_log(log, GateConfig::from(log.header.config), angles);
  Report r;
  r.scalars = {{"S", res.s}, {"sigma_S", res.sigma_s}};
  r.columns = {"theta_s_deg", "theta_i_deg", "E", "sigma_E"};
  r.text.push_back("theta_s   theta_i   E(theta_s, theta_i)");
  const auto settings = angles.settings();
  // rows grouped by theta_s
  for (std::size_t k : {0u, 2u, 1u, 3u}) {
    const auto& s = settings[k];
    const auto& e = res.correlations[k];
    std::ostringstream line;
    line << std::setw(7) << fixed(rad_to_deg(s.theta_s), 1) << std::setw(10)
         << fixed(rad_to_deg(s.theta_i), 1) << std::setw(10) << fixed(e.value, 3) << " +- "
         << fixed(e.sigma, 3);
    r.text.push_back(line.str());
  }
  for (std::size_t k = 0; k < 4; ++k) {
    r.rows.push_back({rad_to_deg(settings[k].theta_s), rad_to_deg(settings[k].theta_i),
                      res.correlations[k].value, res.correlations[k].sigma});
  }
  r.text.push_back("                  S = " + fixed(res.s, 2) + " +- " + fixed(res.sigma_s, 2));
  return r;
}

Report cmd_analyze_gsi(const std::string& log_path) {
  const EventLog log = parse_event_log_file(log_path);
  const CoincidenceTable table = gate_and_count(log, GateConfig::from(log.header.config));
  Report r;
  const CoincidenceCounts pooled = table.pooled();
  const Estimate g = compute_g_si(pooled);
  const DetectionEfficiency eff = detection_efficiency(pooled);
  r.scalars = {{"delta_t_ns", log.header.config.delta_t_ns},
               {"g_si", g.value},
               {"sigma_g_si", g.sigma},
               {"alpha_s", eff.alpha_s},
               {"alpha_i", eff.alpha_i}};
  r.columns = {"setting", "trials", "singles_s", "singles_i", "coincidences", "g_si", "sigma"};
  for (const auto& s : log.header.settings) {
    const auto& c = table.at(s.id);
    json gv = nullptr, gs = nullptr;
    if (c.singles_s > 0 && c.singles_i > 0) {
      const Estimate e = compute_g_si(c);
      gv = e.value;
      gs = e.sigma;
    }
    r.rows.push_back({s.id, c.trials, c.singles_s, c.singles_i, c.coincidences, gv, gs});
  }
  return r;
}

Report cmd_fit_fringe(const std::string& path, double eta, double theta_i_deg) {
  std::vector<FringePoint> points;
  bool have_sigma = true;
  for (const auto& row : read_csv(path, {"theta_s_deg", "counts"})) {
    have_sigma = have_sigma && row.contains("sigma");
    const double sigma = row.contains("sigma") ? row.at("sigma") : 1.0;
    points.push_back({deg_to_rad(row.at("theta_s_deg")), row.at("counts"), sigma});
  }
  // without a sigma column the counts are taken as raw Poisson counts
  const FringeFit fit = have_sigma ? fit_fringe(points, eta, deg_to_rad(theta_i_deg))
                                   : fit_fringe_counts(points, eta, deg_to_rad(theta_i_deg));
  Report r;
  r.scalars = {{"amplitude", fit.amplitude},
               {"background", fit.background},
               {"phase_offset_deg", rad_to_deg(fit.phase_offset)},
               {"visibility", fit.visibility},
               {"chi2", fit.chi2}};
  r.columns = {"theta_s_deg", "counts", "residual"};
  for (std::size_t k = 0; k < points.size(); ++k) {
    r.rows.push_back({rad_to_deg(points[k].theta_s), points[k].counts, fit.residuals[k]});
  }
  return r;
}

Report cmd_fit_decay(const std::string& path) {
  std::vector<DecayPoint> points;
  for (const auto& row : read_csv(path, {"delta_t_ns", "g_si", "sigma"})) {
    points.push_back({row.at("delta_t_ns"), row.at("g_si"), row.at("sigma")});
  }
  const DecayFit fit = fit_exponential(points);
  Report r;
  r.scalars = {{"tau_ns", fit.tau_ns},
               {"sigma_tau_ns", fit.sigma_tau_ns},
               {"floor", fit.floor},
               {"amplitude", fit.amplitude},
               {"chi2", fit.chi2}};
  return r;
}

Report cmd_check_ops(int n_max, std::uint64_t seed) {
  const BranchingTable table(kRubidium85Scheme);
  const double k = 2.0 * std::numbers::pi / 795e-9;
  const double angle = deg_to_rad(2.0);
  const Eigen::Vector3d k_write(0.0, 0.0, k);
  const Eigen::Vector3d k_signal(k * std::sin(angle), 0.0, k * std::cos(angle));
  const SpinWaveComponent probe{-1, HalfInt(0)};

  Report r;
  r.columns = {"N", "vac_minus_minus", "vac_plus_plus", "vac_minus_plus", "commutator",
               "deviation"};
  std::vector<double> log_n, log_dev;
  for (int n = 1; n <= n_max; ++n) {
    const EnsembleModel model = EnsembleModel::random_cloud(
        n, kRubidium85Scheme.fa, kRubidium85Scheme.fb, k_signal - k_write, 1e-3, seed + n);
    const auto mm = mode_vacuum_correlation(model, table, -1, -1);
    const auto pp = mode_vacuum_correlation(model, table, +1, +1);
    const auto mp = mode_vacuum_correlation(model, table, -1, +1);
    const CommutatorCheck c = commutator_deviation(model, probe);
    r.rows.push_back({n, mm.real(), pp.real(), std::abs(mp), c.expectation, c.deviation});
    if (n >= std::min(4, std::max(2, n_max - 1)) && n >= 2) {
      log_n.push_back(std::log(n));
      log_dev.push_back(std::log(c.deviation));
    }
  }
  json exponent = nullptr;
  if (log_n.size() >= 2) {
    const double mx = std::accumulate(log_n.begin(), log_n.end(), 0.0) / log_n.size();
    const double my = std::accumulate(log_dev.begin(), log_dev.end(), 0.0) / log_dev.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
      sxy += (log_n[i] - mx) * (log_dev[i] - my);
      sxx += (log_n[i] - mx) * (log_n[i] - mx);
    }
    exponent = sxy / sxx;
  }
  r.scalars = {{"probe", "alpha=-1, m=0"}, {"seed", seed}, {"scaling_exponent", exponent}};
  return r;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Atom-photon entanglement toolkit: predictions, Monte Carlo and analysis", "dlcz"};
  app.require_subcommand(1);

  std::string format = "text";
  std::string output;
  std::uint64_t seed = 1;
  const auto add_shared = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"text", "json", "csv"}));
    sub->add_option("-o,--output", output, "Write the report to this file instead of stdout");
    if (with_seed) sub->add_option("--seed", seed, "Random seed");
  };

  std::string fa = "3", fb = "2", fc = "3";
  auto* eta_cmd = app.add_subcommand("eta", "Mixing angle eta and the X_m(alpha) table");
  eta_cmd->add_option("--Fa", fa, "F of the initial ground level (e.g. 3 or 5/2)");
  eta_cmd->add_option("--Fb", fb, "F of the final ground level");
  eta_cmd->add_option("--Fc", fc, "F of the excited level");
  add_shared(eta_cmd, false);

  double eta = NAN, eta_pi4 = NAN;
  const auto add_eta = [&](CLI::App* sub) {
    auto* a = sub->add_option("--eta", eta, "Mixing angle in radians (default: 85Rb value)");
    auto* b = sub->add_option("--eta-pi4", eta_pi4, "Mixing angle as a multiple of pi/4");
    a->excludes(b);
  };

  double theta_i = 67.5, amplitude = 1.0, background = 0.0;
  int points = 64;
  auto* fringe_cmd = app.add_subcommand("predict-fringe", "Coincidence fringe C(theta_s)");
  add_eta(fringe_cmd);
  fringe_cmd->add_option("--theta-i", theta_i, "Idler polarizer angle (degrees)");
  fringe_cmd->add_option("--amplitude", amplitude, "Peak counts at eta = pi/4")
      ->check(CLI::NonNegativeNumber);
  fringe_cmd->add_option("--background", background, "Flat background counts")
      ->check(CLI::NonNegativeNumber);
  fringe_cmd->add_option("--points", points, "Samples per 180 degrees")
      ->check(CLI::Range(4, 100000));
  add_shared(fringe_cmd, false);

  std::string angles_text = "-22.5,22.5,0,-45";
  auto* chsh_cmd = app.add_subcommand("predict-chsh", "Ideal correlations and S");
  add_eta(chsh_cmd);
  chsh_cmd->add_option("--angles", angles_text, "theta_s,theta_s',theta_i,theta_i' (degrees)");
  add_shared(chsh_cmd, false);

  std::string config_path, settings_path;
  std::uint64_t n_trials = 0;
  unsigned threads = 0;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo event log");
  sim_cmd->add_option("--config", config_path, "key = value config file (default: built-in)")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--settings", settings_path,
                      "'setting <id> <theta_s> <theta_i>' file (default: CHSH set)")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("-n,--trials", n_trials, "Trials per setting")->required();
  sim_cmd->add_option("--threads", threads, "Worker threads (0: all cores)");
  add_shared(sim_cmd, true);
  sim_cmd->get_option("--output")->required()->description("Event log to write");

  std::string log_path;
  auto* achsh_cmd = app.add_subcommand("analyze-chsh", "E table and S from an event log");
  achsh_cmd->add_option("--log", log_path, "Event log")->required();
  achsh_cmd->add_option("--angles", angles_text, "theta_s,theta_s',theta_i,theta_i' (degrees)");
  add_shared(achsh_cmd, false);

  auto* agsi_cmd = app.add_subcommand("analyze-gsi", "g_si and detection efficiencies");
  agsi_cmd->add_option("--log", log_path, "Event log")->required();
  add_shared(agsi_cmd, false);

  std::string input_path;
  auto* ffit_cmd = app.add_subcommand(
      "fit-fringe", "Fit a fringe; CSV columns theta_s_deg,counts[,sigma]");
  ffit_cmd->add_option("--input", input_path, "CSV file")->required()->check(CLI::ExistingFile);
  add_eta(ffit_cmd);
  ffit_cmd->add_option("--theta-i", theta_i, "Idler polarizer angle (degrees)");
  add_shared(ffit_cmd, false);

  auto* dfit_cmd = app.add_subcommand(
      "fit-decay", "Fit g_si(delta_t); CSV columns delta_t_ns,g_si,sigma");
  dfit_cmd->add_option("--input", input_path, "CSV file")->required()->check(CLI::ExistingFile);
  add_shared(dfit_cmd, false);

  int n_atoms = 12;
  auto* ops_cmd = app.add_subcommand("check-ops", "Collective-operator checks for 1..N atoms");
  ops_cmd->add_option("--N", n_atoms, "Largest atom number (1..12)")->check(CLI::Range(1, 12));
  add_shared(ops_cmd, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    Report report;
    if (*eta_cmd) {
      report = cmd_eta(fa, fb, fc);
    } else if (*fringe_cmd) {
      report = cmd_predict_fringe(resolve_eta(eta, eta_pi4), theta_i, amplitude, background, points);
    } else if (*chsh_cmd) {
      report = cmd_predict_chsh(resolve_eta(eta, eta_pi4), parse_angles(angles_text));
    } else if (*sim_cmd) {
      report = cmd_simulate(config_path, settings_path, n_trials, seed, output, threads, err);
    } else if (*achsh_cmd) {
      report = cmd_analyze_chsh(log_path, parse_angles(angles_text));
    } else if (*agsi_cmd) {
      report = cmd_analyze_gsi(log_path);
    } else if (*ffit_cmd) {
      report = cmd_fit_fringe(input_path, resolve_eta(eta, eta_pi4), theta_i);
    } else if (*dfit_cmd) {
      report = cmd_fit_decay(input_path);
    } else if (*ops_cmd) {
      report = cmd_check_ops(n_atoms, seed);
    }
    if (!output.empty() && !*sim_cmd) {
      std::ofstream file(output);
      if (!file) throw ParseError(0, "cannot write " + output);
      render(report, format, file);
    } else {
      render(report, format, out);
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kSuccess;
}

}  // namespace dlcz::cli
