#include "maxcorr_cli/app.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "maxcorr/baselines.hpp"
#include "maxcorr/cca.hpp"
#include "maxcorr/error.hpp"
#include "maxcorr/model.hpp"
#include "maxcorr/resonance.hpp"
#include "maxcorr/serialize.hpp"
#include "maxcorr/solver.hpp"
#include "maxcorr_cli/config.hpp"

namespace maxcorr::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;
namespace io = maxcorr::json;

// Shortest round-trip text, so CSV output is exact and reproducible.
std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct Artifact {
  std::string text;
  int code = exit_ok;
  std::string message;
};

Resolved load(const Options& opt) {
  if (opt.config.empty()) throw_config("--config is required");
  const json raw = read_json_file(opt.config);
  RunConfig cfg = parse_run_config(raw, fs::path(opt.config).parent_path().string());
  if (!opt.data.empty()) cfg.data = opt.data;
  if (opt.seed) cfg.solver.seed = *opt.seed;
  return resolve(std::move(cfg));
}

json header(const std::string& command, const Resolved& r) {
  json excluded = r.dataset.excluded();
  return {{"command", command},
          {"config", to_json(r)},
          {"dataset", {{"rows", r.dataset.n_rows()}, {"excluded_constant_columns", excluded}}}};
}

void weight_rows(std::ostringstream& os, const Dataset& ds, const WeightPair& w) {
  const auto xs = ds.active_names(Side::x);
  const auto ys = ds.active_names(Side::y);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    os << "a." << xs[i] << ',' << fmt(w.a(static_cast<Eigen::Index>(i))) << '\n';
  }
  for (std::size_t j = 0; j < ys.size(); ++j) {
    os << "b." << ys[j] << ',' << fmt(w.b(static_cast<Eigen::Index>(j))) << '\n';
  }
}

Artifact fit_like(const std::string& command, const Resolved& r, const FitResult& res,
                  Format format) {
  const Dataset& ds = r.dataset;
  const LineModel line = r.config.direction == RegressionDirection::y_on_x
                             ? regress_y_on_x(ds, res.weights)
                             : regress_x_on_y(ds, res.weights);
  const ExpandedModel model = expand(line, res.weights, ds, res.correlation);
  Artifact a;
  if (format == Format::json) {
    json j = header(command, r);
    j["fit"] = io::fit_result(ds, res);
    j["fit"]["max_violation"] = max_violation(r.constraints, r.normalization, res.weights);
    j["line"] = io::line_model(line);
    j["model"] = io::expanded_model(model);
    a.text = dump(j);
  } else {
    std::ostringstream os;
    os << "key,value\n"
       << "correlation," << fmt(res.correlation) << '\n'
       << "status," << to_string(res.status) << '\n'
       << "starts_agreeing," << res.starts_agreeing << '\n'
       << "starts_converged," << res.starts_converged << '\n'
       << "iterations," << res.iterations << '\n';
    weight_rows(os, ds, res.weights);
    os << "slope," << fmt(line.slope) << '\n'
       << "intercept," << fmt(line.intercept) << '\n'
       << "r_squared," << fmt(line.r_squared) << '\n';
    a.text = os.str();
  }
  if (res.status == FitStatus::max_iterations) {
    a.code = exit_nonconvergence;
    a.message = "did not converge (status max_iterations); best weights written";
  }
  return a;
}

Artifact cmd_fit(const Options& opt, Format format) {
  const Resolved r = load(opt);
  const FitResult res = maximize(r.dataset, r.constraints, r.normalization, r.config.solver);
  if (res.status == FitStatus::infeasible) {
    throw Error(ErrorKind::infeasible, "infeasible: no weights satisfy the constraints");
  }
  return fit_like("fit", r, res, format);
}

Artifact cmd_target(const Options& opt, Format format) {
  const Resolved r = load(opt);
  if (!r.config.target) throw_config("the target command needs 'target' in the config");
  const FitResult res =
      solve_for_target(r.dataset, r.constraints, r.normalization, *r.config.target, r.config.solver);
  if (res.status == FitStatus::infeasible) {
    if (res.weights.size() == 0) {
      throw Error(ErrorKind::infeasible, "infeasible: no weights satisfy the constraints");
    }
    std::ostringstream msg;
    msg << "infeasible: target " << fmt(*r.config.target)
        << " exceeds the constrained maximum " << fmt(res.correlation);
    throw Error(ErrorKind::infeasible, msg.str());
  }
  return fit_like("target", r, res, format);
}

Artifact cmd_cca(const Options& opt, Format format) {
  const Resolved r = load(opt);
  const CcaSolution sol = cca_first_pair(r.dataset);
  Artifact a;
  if (format == Format::json) {
    json j = header("cca", r);
    j["cca"] = io::cca_solution(r.dataset, sol);
    a.text = dump(j);
  } else {
    std::ostringstream os;
    os << "key,value\nrho," << fmt(sol.rho) << '\n';
    weight_rows(os, r.dataset, {sol.a, sol.b});
    a.text = os.str();
  }
  return a;
}

Artifact cmd_ls_compare(const Options& opt, Format format) {
  const Resolved r = load(opt);
  const Dataset& ds = r.dataset;
  const ComparisonReport cmp = compare_normalizations(ds, r.config.solver);
  const std::string column = r.config.probe.column.value_or(ds.active_names(Side::x).front());
  const ProbeReport probe = scale_invariance_probe(ds, column, r.config.probe.factor, r.config.solver);
  Artifact a;
  if (format == Format::json) {
    json j = header("ls-compare", r);
    j["comparison"] = io::comparison_report(ds, cmp);
    j["probe"] = io::probe_report(ds, probe);
    a.text = dump(j);
  } else {
    std::ostringstream os;
    os << "method,normalization,achieved_correlation,divergence_after_scaling\n";
    for (const auto& f : cmp.fits) {
      os << "least_squares," << f.coefficient << ','
         << (f.model ? fmt(f.model->achieved_correlation) : std::string()) << ',';
      for (const auto& e : probe.least_squares) {
        if (e.normalization == f.coefficient + "=1") os << fmt(e.divergence);
      }
      os << '\n';
    }
    for (const auto& e : probe.least_squares) {
      if (e.normalization.starts_with("sum")) {
        os << "least_squares," << e.normalization << ',' << fmt(e.correlation_before) << ','
           << fmt(e.divergence) << '\n';
      }
    }
    os << "maxcorr," << probe.maxcorr.normalization << ',' << fmt(cmp.maxcorr.correlation) << ','
       << fmt(probe.maxcorr.divergence) << '\n';
    a.text = os.str();
  }
  return a;
}

Artifact cmd_resonance(const Options& opt, Format format) {
  const Resolved r = load(opt);
  const Dataset& ds = r.dataset;
  const IntegerSearchResult found = integer_search(ds, r.config.resonance.search);
  std::optional<FitResult> fit;
  if (r.config.resonance.threshold) {
    fit = maximize(ds, r.constraints, r.normalization, r.config.solver);
    if (fit->status == FitStatus::infeasible) {
      throw Error(ErrorKind::infeasible, "infeasible: no weights satisfy the constraints");
    }
  }
  Artifact a;
  if (format == Format::json) {
    json head = header("resonance", r);
    head["enumeration_size"] = found.enumeration_size;
    head["evaluated"] = found.evaluated;
    head["degenerate"] = found.degenerate;
    std::string text = head.dump() + "\n";
    for (std::size_t i = 0; i < found.hits.size(); ++i) {
      json hit = io::resonance_hit(ds, found.hits[i]);
      hit["rank"] = i + 1;
      text += hit.dump() + "\n";
    }
    if (fit) {
      json line = {{"fit", io::fit_result(ds, *fit)},
                   {"nearest_integer",
                    io::nearest_integer_report(
                        nearest_integer_report(*fit, *r.config.resonance.threshold))}};
      text += line.dump() + "\n";
    }
    a.text = std::move(text);
  } else {
    std::ostringstream os;
    os << "rank";
    for (const auto& n : ds.active_names(Side::x)) os << ",a." << n;
    for (const auto& n : ds.active_names(Side::y)) os << ",b." << n;
    os << ",correlation\n";
    for (std::size_t i = 0; i < found.hits.size(); ++i) {
      os << i + 1;
      for (auto v : found.hits[i].a) os << ',' << v;
      for (auto v : found.hits[i].b) os << ',' << v;
      os << ',' << fmt(found.hits[i].correlation) << '\n';
    }
    a.text = os.str();
  }
  if (fit && fit->status == FitStatus::max_iterations) {
    a.code = exit_nonconvergence;
    a.message = "the continuous fit behind the nearest-integer report did not converge";
  }
  return a;
}

std::set<std::string> inputs_of(const std::vector<ExpandedModel::Coefficient>& coeffs) {
  std::set<std::string> out;
  for (const auto& c : coeffs) {
    for (auto& name : c.term->inputs()) out.insert(name);
  }
  return out;
}

Artifact cmd_predict(const Options& opt, Format format) {
  if (opt.config.empty()) throw_config("predict needs --config pointing at a fit artifact or model");
  if (opt.data.empty()) throw_config("predict needs --data with the rows to score");
  const json raw = read_json_file(opt.config);
  const json* model_json = &raw;
  if (raw.is_object() && raw.contains("model")) model_json = &raw.at("model");
  if (!model_json->is_object() || !model_json->contains("x_coeffs")) {
    throw_config("'" + opt.config + "' holds neither a fit artifact nor a model");
  }
  ExpandedModel model;
  try {
    model = io::parse_expanded_model(*model_json);
  } catch (const nlohmann::json::exception& e) {
    throw_config(std::string("malformed model: ") + e.what());
  }

  const CsvTable rows = load_csv_table(opt.data);
  const std::set<std::string> have(rows.header.begin(), rows.header.end());
  for (const auto& name : model.required_x_inputs()) {
    if (!have.count(name)) throw_data("rows lack variable '" + name + "' required by the model");
  }
  const std::set<std::string> y_inputs = inputs_of(model.y_coeffs);
  bool with_actual = true;
  for (const auto& name : y_inputs) with_actual = with_actual && have.count(name) > 0;

  std::ostringstream os;
  json list = json::array();
  if (format == Format::csv) os << (with_actual ? "row,expected,actual,residual\n" : "row,expected\n");
  for (std::size_t i = 0; i < rows.n_rows(); ++i) {
    InputRow row;
    for (std::size_t c = 0; c < rows.header.size(); ++c) row[rows.header[c]] = rows.columns[c][i];
    const double expected = predict_expected_y(model, row);
    double actual = 0.0;
    if (with_actual) {
      for (const auto& c : model.y_coeffs) actual += c.value * c.term->evaluate(row);
    }
    if (format == Format::csv) {
      os << i + 1 << ',' << fmt(expected);
      if (with_actual) os << ',' << fmt(actual) << ',' << fmt(actual - expected);
      os << '\n';
    } else {
      json e = {{"row", i + 1}, {"expected", io::number(expected)}};
      if (with_actual) {
        e["actual"] = io::number(actual);
        e["residual"] = io::number(actual - expected);
      }
      list.push_back(std::move(e));
    }
  }
  Artifact a;
  a.text = format == Format::csv ? os.str() : dump(json{{"predictions", list}});
  return a;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return exit_config;
    case ErrorKind::data: return exit_data;
    case ErrorKind::infeasible: return exit_infeasible;
    case ErrorKind::nonconvergence: return exit_nonconvergence;
  }
  return exit_config;
}

}  // namespace

void write_atomically(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw_config("cannot write '" + tmp.string() + "'");
    f << content;
    f.flush();
    if (!f) throw_config("failed while writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw_config("cannot move output into place at '" + path + "'");
  }
}

int execute(const Options& options, std::ostream& out, std::ostream& err) {
  const std::string& cmd = options.command;
  try {
    const Format format =
        options.format.value_or(cmd == "predict" ? Format::csv : Format::json);
    Artifact a;
    if (cmd == "fit") {
      a = cmd_fit(options, format);
    } else if (cmd == "target") {
      a = cmd_target(options, format);
    } else if (cmd == "cca") {
      a = cmd_cca(options, format);
    } else if (cmd == "ls-compare") {
      a = cmd_ls_compare(options, format);
    } else if (cmd == "resonance") {
      a = cmd_resonance(options, format);
    } else if (cmd == "predict") {
      a = cmd_predict(options, format);
    } else {
      throw_config("unknown command '" + cmd + "'");
    }
    if (options.out.empty()) {
      out << a.text;
    } else {
      write_atomically(options.out, a.text);
    }
    if (!a.message.empty()) err << "maxcorr " << cmd << ": " << a.message << '\n';
    return a.code;
  } catch (const Error& e) {
    err << "maxcorr " << cmd << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    err << "maxcorr " << cmd << ": invalid config: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "maxcorr " << cmd << ": " << e.what() << '\n';
    return exit_data;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Maximum-correlation modelling between two sets of variables"};
  app.require_subcommand(1);
  Options opt;
  std::string format;
  std::uint64_t seed = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"fit", "Maximize the correlation under the configured constraints"},
      {"cca", "First canonical pair, unconstrained"},
      {"ls-compare", "Least-squares fits against the maximum-correlation fit, with a scale probe"},
      {"target", "Find weights reaching a target correlation"},
      {"resonance", "Exhaustive search over small integer weights"},
      {"predict", "Apply a fitted model to new rows"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config,--model", opt.config, "Config file (predict: fit artifact)");
    sub->add_option("--data", opt.data, "CSV data file");
    sub->add_option("--out", opt.out, "Output path (default: stdout)");
    sub->add_option("--seed", seed, "Override solver.seed");
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->callback([&opt, name] { opt.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "maxcorr: " << e.what() << '\n';
    return exit_config;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) opt.seed = seed;
  }
  if (!format.empty()) opt.format = format == "csv" ? Format::csv : Format::json;
  return execute(opt, out, err);
}

}  // namespace maxcorr::cli
