// calib: post-hoc temperature-scaling calibration toolkit.
//
// Subcommands form a file-based pipeline; each stage reads and writes
// plain CSV/JSONL/JSON so that every step is scriptable on its own:
//
//   calib synth  -> dataset (+ oracle sidecar)
//   calib fit    -> temperature report
//   calib eval   -> metric panel report
//   calib plot   -> reliability diagram (SVG or CSV)
//   calib decide -> decisions / expected-cost report
//
// Exit codes: 0 success, 1 user/input error, 2 internal invariant
// violation.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "calib/decision.hpp"
#include "calib/error.hpp"
#include "calib/fit.hpp"
#include "calib/io.hpp"
#include "calib/metrics.hpp"
#include "calib/reliability.hpp"
#include "calib/rng.hpp"
#include "calib/scaling.hpp"
#include "calib/synth.hpp"
#include "calib/types.hpp"

namespace {

using nlohmann::ordered_json;

bool g_json_errors = false;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

calib::SubsetSelector make_selector(const std::string& name,
                                    const std::optional<calib::ClassTaxonomy>&
                                        taxonomy) {
  if (name == "all") return calib::SubsetSelector::all();
  if (name == "negative-logit") return calib::SubsetSelector::negative_logit();
  if (name == "predicted-benign") {
    if (!taxonomy)
      throw calib::Error(
          calib::ErrorCode::IncompatibleSelector,
          "selector predicted-benign needs malignancy flags in the dataset "
          "header (field: malignancy)");
    return calib::SubsetSelector::predicted_benign(*taxonomy);
  }
  throw UsageError("unknown selector '" + name +
                   "' (expected all | negative-logit | predicted-benign)");
}

const char* method_name(calib::FitMethod method) {
  return method == calib::FitMethod::Grid ? "grid" : "golden_section";
}

double temperature_from_report(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw calib::Error(calib::ErrorCode::IoError, "cannot open " + path);
  ordered_json j;
  try {
    in >> j;
    return j.at("results").at("temperature").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw calib::Error(calib::ErrorCode::ParseError,
                       path + " is not a fit report: " + e.what());
  }
}

ordered_json ece_row_binary(const calib::LogitDataset& dataset,
                            const calib::Temperature& t,
                            const calib::BinningConfig& bins) {
  const auto neg =
      calib::ece_binary(dataset, t, calib::EceRegion::LogitNegative, bins);
  const auto pos =
      calib::ece_binary(dataset, t, calib::EceRegion::LogitNonNegative, bins);
  return ordered_json{{"temperature", t.value()},
                      {"ece_z_neg", neg.value},
                      {"ece_z_nonneg", pos.value},
                      {"n_z_neg", neg.n_used},
                      {"n_z_nonneg", pos.n_used}};
}

ordered_json ece_row_multiclass(const calib::LogitDataset& dataset,
                                const calib::ClassTaxonomy& taxonomy,
                                const calib::Temperature& t,
                                const calib::BinningConfig& bins) {
  const auto ben = calib::classwise_ece(dataset, taxonomy, t,
                                        calib::ClasswiseSplit::PredictedBenign,
                                        bins);
  const auto mal = calib::classwise_ece(
      dataset, taxonomy, t, calib::ClasswiseSplit::PredictedMalignant, bins);
  const auto k = static_cast<std::size_t>(dataset.num_classes());
  return ordered_json{{"temperature", t.value()},
                      {"ece_benign", ben.value},
                      {"ece_malignant", mal.value},
                      {"n_benign_split", ben.n_used / k},
                      {"n_malignant_split", mal.n_used / k}};
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string out;
  std::string oracle_out;
  std::size_t n = 10000;
  std::string mode = "binary";
  int num_classes = 7;
  int benign_classes = -1;
  double scale = 1.0;
  std::vector<double> region_scales;  // (s_neg, s_pos) when set
  std::vector<double> priors;
  std::vector<double> separation;
  std::uint64_t seed = 0;
};

calib::ClassTaxonomy default_taxonomy(int num_classes, int benign) {
  std::vector<std::string> names;
  std::vector<calib::Malignancy> flags;
  if (num_classes == 2 && benign == 1) {
    names = {"benign", "malignant"};
    flags = {calib::Malignancy::Benign, calib::Malignancy::Malignant};
    return calib::ClassTaxonomy(names, flags);
  }
  for (int k = 0; k < num_classes; ++k) {
    const bool is_benign = k < benign;
    names.push_back((is_benign ? "benign" : "malignant") + std::to_string(k));
    flags.push_back(is_benign ? calib::Malignancy::Benign
                              : calib::Malignancy::Malignant);
  }
  return calib::ClassTaxonomy(names, flags);
}

int run_synth(const SynthArgs& args) {
  calib::SynthSpec spec;
  spec.n = args.n;
  spec.num_classes = args.mode == "binary" ? 2 : args.num_classes;
  spec.class_priors = args.priors;
  spec.separation = args.separation;
  spec.miscal_scale = args.scale;
  spec.seed = args.seed;
  const int benign = args.benign_classes > 0
                         ? args.benign_classes
                         : (spec.num_classes == 2 ? 1 : spec.num_classes / 2);
  if (benign <= 0 || benign >= spec.num_classes)
    throw UsageError("--benign must be in (0, classes)");
  spec.taxonomy = default_taxonomy(spec.num_classes, benign);

  const auto result =
      args.region_scales.empty()
          ? calib::generate(spec)
          : calib::generate_region_miscalibrated(spec, args.region_scales[0],
                                                 args.region_scales[1]);

  calib::write_dataset(result.dataset, spec.taxonomy, args.out,
                       calib::infer_format(args.out));

  // Sidecar with the generating model's true posteriors.
  const std::string oracle_path =
      args.oracle_out.empty() ? args.out + ".oracle.csv" : args.oracle_out;
  std::ostringstream oracle;
  oracle << "# num_classes=" << spec.num_classes << '\n';
  for (std::size_t k = 0; k < result.oracle.num_classes(); ++k)
    oracle << 'p' << k << (k + 1 < result.oracle.num_classes() ? ',' : '\n');
  char buf[40];
  for (std::size_t i = 0; i < result.oracle.size(); ++i) {
    for (std::size_t k = 0; k < result.oracle.num_classes(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", result.oracle.posterior(i, k));
      oracle << buf << (k + 1 < result.oracle.num_classes() ? ',' : '\n');
    }
  }
  calib::write_text_atomic(oracle_path, oracle.str());

  std::cout << "wrote " << result.dataset.size() << " examples to " << args.out
            << " (oracle: " << oracle_path << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string data;
  std::string selector = "all";
  std::string out;
  double bracket_lo = 0.05;
  double bracket_hi = 20.0;
  double tolerance = 1e-6;
  std::size_t grid_points = 0;  // 0 = golden section
};

int run_fit(const FitArgs& args) {
  const auto read = calib::read_dataset(args.data);
  for (const auto& notice : read.notices)
    std::cerr << "note: " << notice << '\n';
  const auto selector = make_selector(args.selector, read.taxonomy);

  calib::FitResult result = [&] {
    if (args.grid_points > 0) {
      const auto grid = calib::geometric_grid(args.bracket_lo, args.bracket_hi,
                                              args.grid_points);
      return calib::fit_temperature_grid(read.dataset, selector, grid);
    }
    calib::FitConfig config;
    config.bracket_lo = args.bracket_lo;
    config.bracket_hi = args.bracket_hi;
    config.tolerance = args.tolerance;
    return calib::fit_temperature(read.dataset, selector, config);
  }();

  if (result.at_bracket_edge)
    std::cerr << "warning: minimiser within tolerance of a bracket end; "
                 "consider widening --bracket-lo/--bracket-hi\n";

  if (!args.out.empty()) {
    ordered_json config{{"selector", args.selector},
                        {"bracket_lo", args.bracket_lo},
                        {"bracket_hi", args.bracket_hi},
                        {"tolerance", args.tolerance}};
    if (args.grid_points > 0) config["grid_points"] = args.grid_points;
    ordered_json results{{"temperature", result.temperature.value()},
                         {"subset_size", result.subset_size},
                         {"final_nll", result.final_nll},
                         {"iterations", result.iterations},
                         {"method", method_name(result.method)},
                         {"at_bracket_edge", result.at_bracket_edge}};
    calib::write_report(calib::make_report("fit", args.data, config, results),
                        args.out);
  }
  std::cout << result.temperature.value() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string data;
  std::string out;
  std::optional<double> temperature;
  std::optional<double> t_star;
  std::string fit_report;
  std::string fit_star_report;
  int bins = 15;
};

int run_eval(const EvalArgs& args) {
  const auto read = calib::read_dataset(args.data);
  for (const auto& notice : read.notices)
    std::cerr << "note: " << notice << '\n';
  const auto& dataset = read.dataset;

  std::optional<double> t = args.temperature;
  if (!args.fit_report.empty()) {
    if (t)
      throw UsageError("--temperature and --fit are mutually exclusive");
    t = temperature_from_report(args.fit_report);
  }
  std::optional<double> t_star = args.t_star;
  if (!args.fit_star_report.empty()) {
    if (t_star)
      throw UsageError("--t-star and --fit-star are mutually exclusive");
    t_star = temperature_from_report(args.fit_star_report);
  }

  const calib::BinningConfig bins{args.bins};
  const bool binary = dataset.binary_mode();
  if (!binary && !read.taxonomy)
    throw calib::Error(
        calib::ErrorCode::IncompatibleSelector,
        "multi-class evaluation needs malignancy flags in the dataset header "
        "(field: malignancy)");

  const auto row = [&](const calib::Temperature& temp) {
    return binary ? ece_row_binary(dataset, temp, bins)
                  : ece_row_multiclass(dataset, *read.taxonomy, temp, bins);
  };

  ordered_json methods = ordered_json::array();
  {
    ordered_json none = row(calib::Temperature(1.0));
    none.erase("temperature");
    ordered_json entry{{"name", "none"}, {"temperature", 1.0}};
    entry.update(none);
    methods.push_back(entry);
  }
  if (t) {
    ordered_json r = row(calib::Temperature(*t));
    r.erase("temperature");
    ordered_json entry{{"name", "temp"}, {"temperature", *t}};
    entry.update(r);
    methods.push_back(entry);
  }
  if (t_star) {
    ordered_json r = row(calib::Temperature(*t_star));
    r.erase("temperature");
    ordered_json entry{{"name", "temp_star"}, {"temperature", *t_star}};
    entry.update(r);
    methods.push_back(entry);
  }

  ordered_json results{{"panel", binary ? "binary" : "multiclass"},
                       {"n", dataset.size()},
                       {"balanced_accuracy", calib::balanced_accuracy(dataset)},
                       {"auc", calib::auc_ovr(dataset)},
                       {"methods", methods}};
  ordered_json config{{"bins", args.bins}};
  if (t) config["temperature"] = *t;
  if (t_star) config["t_star"] = *t_star;

  calib::write_report(calib::make_report("eval", args.data, config, results),
                      args.out);
  std::cout << "wrote " << args.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// plot

struct PlotArgs {
  std::string data;
  std::string out;
  std::vector<double> temperatures;
  int bins = 15;
  std::size_t n_boot = 1000;
  std::uint64_t seed = 0;
  std::string format = "svg";
};

std::string per_temperature_path(const std::string& base, double t,
                                 bool single) {
  if (single) return base;
  const auto dot = base.find_last_of('.');
  char suffix[32];
  std::snprintf(suffix, sizeof(suffix), "_T%.6g", t);
  if (dot == std::string::npos) return base + suffix;
  return base.substr(0, dot) + suffix + base.substr(dot);
}

int run_plot(const PlotArgs& args) {
  const auto read = calib::read_dataset(args.data);
  for (const auto& notice : read.notices)
    std::cerr << "note: " << notice << '\n';
  if (!read.dataset.binary_mode())
    throw calib::Error(calib::ErrorCode::ShapeMismatch,
                       "plot requires a binary dataset");
  const auto format =
      args.format == "csv" ? calib::PlotFormat::Csv : calib::PlotFormat::Svg;
  const auto temps =
      args.temperatures.empty() ? std::vector<double>{1.0} : args.temperatures;
  for (double t : temps) {
    const auto report = calib::consistency_intervals(
        read.dataset, calib::Temperature(t), calib::BinningConfig{args.bins},
        args.n_boot, args.seed);
    const auto path = per_temperature_path(args.out, t, temps.size() == 1);
    calib::render_reliability(report, format, path);
    std::cout << "wrote " << path << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// decide

struct DecideArgs {
  std::string data;
  std::string out;
  double temperature = 1.0;
  std::string costs_path;
  std::vector<double> binary_costs;  // c_fp,c_fn[,c_tp,c_tn]
  std::string sample_constraint;
  std::size_t n_samples = 100;
  std::uint64_t seed = 0;
};

calib::CostConstraint parse_constraint(const std::string& name) {
  if (name == "malignant-miss-dominant")
    return calib::CostConstraint::MalignantMissDominant;
  if (name == "benign-misclassification-dominant")
    return calib::CostConstraint::BenignMisclassificationDominant;
  throw UsageError("unknown constraint '" + name +
                   "' (expected malignant-miss-dominant | "
                   "benign-misclassification-dominant)");
}

int run_decide(const DecideArgs& args) {
  const auto read = calib::read_dataset(args.data);
  for (const auto& notice : read.notices)
    std::cerr << "note: " << notice << '\n';
  const auto& dataset = read.dataset;
  const calib::Temperature t(args.temperature);

  const int provided = (!args.costs_path.empty() ? 1 : 0) +
                       (!args.binary_costs.empty() ? 1 : 0) +
                       (!args.sample_constraint.empty() ? 1 : 0);
  if (provided != 1)
    throw UsageError(
        "provide exactly one of --costs, --binary-costs, --sample-costs");

  ordered_json config{{"temperature", args.temperature}};
  ordered_json results;

  if (!args.sample_constraint.empty()) {
    if (!read.taxonomy)
      throw calib::Error(calib::ErrorCode::IncompatibleSelector,
                         "--sample-costs needs malignancy flags in the "
                         "dataset header (field: malignancy)");
    const auto constraint = parse_constraint(args.sample_constraint);
    calib::Rng rng(args.seed);
    ordered_json draws = ordered_json::array();
    double sum = 0.0, lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < args.n_samples; ++i) {
      const auto costs = calib::sample_constrained_costs(
          constraint, dataset.num_classes(), *read.taxonomy, rng);
      const double cost = calib::empirical_expected_cost(dataset, t, costs);
      ordered_json draw{{"expected_cost", cost}};
      if (dataset.num_classes() == 2) {
        const calib::BinaryCosts bc{costs.cost(1, 0), costs.cost(0, 1),
                                    costs.cost(1, 1), costs.cost(0, 0)};
        draw["threshold"] = calib::binary_threshold(bc);
      }
      draws.push_back(draw);
      sum += cost;
      lo = i == 0 ? cost : std::min(lo, cost);
      hi = i == 0 ? cost : std::max(hi, cost);
    }
    config["sample_costs"] = args.sample_constraint;
    config["n_samples"] = args.n_samples;
    config["seed"] = args.seed;
    results = ordered_json{
        {"draws", draws},
        {"summary",
         {{"mean_expected_cost", sum / static_cast<double>(args.n_samples)},
          {"min_expected_cost", lo},
          {"max_expected_cost", hi}}}};
  } else {
    const auto costs = [&] {
      if (!args.costs_path.empty()) {
        config["costs"] = args.costs_path;
        return calib::read_cost_matrix(args.costs_path, read.taxonomy);
      }
      if (args.binary_costs.size() != 2 && args.binary_costs.size() != 4)
        throw UsageError("--binary-costs wants c_fp,c_fn or c_fp,c_fn,c_tp,c_tn");
      calib::BinaryCosts bc;
      bc.c_fp = args.binary_costs[0];
      bc.c_fn = args.binary_costs[1];
      if (args.binary_costs.size() == 4) {
        bc.c_tp = args.binary_costs[2];
        bc.c_tn = args.binary_costs[3];
      }
      config["binary_costs"] = args.binary_costs;
      config["threshold"] = calib::binary_threshold(bc);
      return calib::binary_cost_matrix(bc);
    }();
    if (!costs.dominated_actions().empty()) {
      std::cerr << "warning: cost matrix has dominated actions:";
      for (auto a : costs.dominated_actions())
        std::cerr << ' ' << costs.action_names()[a];
      std::cerr << '\n';
    }

    std::vector<std::size_t> actions(dataset.size());
    double total = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const auto prob = [&] {
        if (dataset.binary_mode()) {
          const double p = calib::sigmoid_scaled(dataset.scalar_logit(i), t);
          return calib::ProbabilityVector({1.0 - p, p});
        }
        return calib::softmax_scaled(dataset.row(i), t);
      }();
      actions[i] = calib::decide(prob, costs);
      total += costs.cost(actions[i],
                          static_cast<std::size_t>(dataset.label(i)));
    }
    results = ordered_json{
        {"action_names", costs.action_names()},
        {"expected_cost", total / static_cast<double>(dataset.size())},
        {"actions", actions}};
  }

  calib::write_report(
      calib::make_report("decide", args.data, config, results), args.out);
  std::cout << "wrote " << args.out << '\n';
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"post-hoc classifier-calibration toolkit"};
  app.require_subcommand(1);
  app.add_flag("--json-errors", g_json_errors,
               "emit a machine-readable JSON error line on stderr");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand(
      "synth", "generate a synthetic logit dataset with a known oracle");
  synth->add_option("--out", synth_args.out, "dataset output path (.csv/.jsonl)")
      ->required();
  synth->add_option("--oracle", synth_args.oracle_out,
                    "oracle sidecar path (default <out>.oracle.csv)");
  synth->add_option("--n", synth_args.n, "number of examples")
      ->check(CLI::PositiveNumber);
  synth->add_option("--mode", synth_args.mode, "binary | multiclass")
      ->check(CLI::IsMember({"binary", "multiclass"}));
  synth->add_option("--classes", synth_args.num_classes,
                    "class count for multiclass mode")
      ->check(CLI::Range(2, 1000));
  synth->add_option("--benign", synth_args.benign_classes,
                    "benign class count (default classes/2, binary: 1)");
  synth->add_option("--scale", synth_args.scale,
                    "miscalibration scale applied to calibrated logits")
      ->check(CLI::PositiveNumber);
  synth
      ->add_option("--region-scales", synth_args.region_scales,
                   "s_neg,s_pos region scales (z<0 / benign-argmax region "
                   "first)")
      ->expected(2)
      ->delimiter(',');
  synth->add_option("--priors", synth_args.priors, "class priors, sum to 1")
      ->delimiter(',');
  synth
      ->add_option("--separation", synth_args.separation,
                   "per-class score means")
      ->delimiter(',');
  synth->add_option("--seed", synth_args.seed, "RNG seed");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "estimate T by minimising subset NLL");
  fit->add_option("--data", fit_args.data, "dataset path")->required();
  fit->add_option("--selector", fit_args.selector,
                  "all | negative-logit | predicted-benign");
  fit->add_option("--out", fit_args.out, "fit report path (JSON)");
  fit->add_option("--bracket-lo", fit_args.bracket_lo, "bracket lower end")
      ->check(CLI::PositiveNumber);
  fit->add_option("--bracket-hi", fit_args.bracket_hi, "bracket upper end")
      ->check(CLI::PositiveNumber);
  fit->add_option("--tol", fit_args.tolerance, "tolerance on log T")
      ->check(CLI::PositiveNumber);
  fit->add_option("--grid", fit_args.grid_points,
                  "evaluate an exhaustive geometric grid instead");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "metric panel at T=1, T and T*");
  eval->add_option("--data", eval_args.data, "dataset path")->required();
  eval->add_option("--out", eval_args.out, "eval report path (JSON)")
      ->required();
  eval->add_option("--temperature", eval_args.temperature, "supplied T");
  eval->add_option("--t-star", eval_args.t_star, "supplied T*");
  eval->add_option("--fit", eval_args.fit_report,
                   "read T from a prior fit report");
  eval->add_option("--fit-star", eval_args.fit_star_report,
                   "read T* from a prior fit report");
  eval->add_option("--bins", eval_args.bins, "ECE bin count")
      ->check(CLI::Range(2, 10000));

  PlotArgs plot_args;
  auto* plot = app.add_subcommand("plot", "reliability diagram with bars");
  plot->add_option("--data", plot_args.data, "binary dataset path")
      ->required();
  plot->add_option("--out", plot_args.out, "output path")->required();
  plot->add_option("--temperature", plot_args.temperatures,
                   "temperature(s); one diagram per value");
  plot->add_option("--bins", plot_args.bins, "bin count")
      ->check(CLI::Range(2, 10000));
  plot->add_option("--n-boot", plot_args.n_boot, "bootstrap replicates")
      ->check(CLI::Range(std::size_t{100}, std::size_t{1000000}));
  plot->add_option("--seed", plot_args.seed, "RNG seed");
  plot->add_option("--format", plot_args.format, "svg | csv")
      ->check(CLI::IsMember({"svg", "csv"}));

  DecideArgs decide_args;
  auto* decide =
      app.add_subcommand("decide", "expected-cost-minimising decisions");
  decide->add_option("--data", decide_args.data, "dataset path")->required();
  decide->add_option("--out", decide_args.out, "decision report path (JSON)")
      ->required();
  decide->add_option("--temperature", decide_args.temperature,
                     "temperature for the posterior")
      ->check(CLI::PositiveNumber);
  decide->add_option("--costs", decide_args.costs_path, "cost matrix CSV");
  decide
      ->add_option("--binary-costs", decide_args.binary_costs,
                   "c_fp,c_fn[,c_tp,c_tn]")
      ->delimiter(',');
  decide->add_option("--sample-costs", decide_args.sample_constraint,
                     "draw from a constrained cost family");
  decide->add_option("--n-samples", decide_args.n_samples,
                     "number of sampled cost matrices")
      ->check(CLI::PositiveNumber);
  decide->add_option("--seed", decide_args.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // CLI11's native exit codes exceed 100; the contract here is plain
    // 0 for --help, 1 for any user error.
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (synth->parsed()) return run_synth(synth_args);
  if (fit->parsed()) return run_fit(fit_args);
  if (eval->parsed()) return run_eval(eval_args);
  if (plot->parsed()) return run_plot(plot_args);
  if (decide->parsed()) return run_decide(decide_args);
  return 1;
}

void emit_json_error(const std::string& code, const std::string& message) {
  if (!g_json_errors) return;
  ordered_json j{{"error", code}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    emit_json_error("UsageError", e.what());
    return 1;
  } catch (const calib::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    emit_json_error(calib::error_code_name(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    emit_json_error("Internal", e.what());
    return 2;
  }
}
