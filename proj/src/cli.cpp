// Apache License, Version 2.0, refer to LICENSE.txt

#include "ltdm/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "ltdm/dataset_io.hpp"
#include "ltdm/evaluation.hpp"
#include "ltdm/fixtures.hpp"
#include "ltdm/identifiability.hpp"
#include "ltdm/inference.hpp"
#include "ltdm/ingestion.hpp"
#include "ltdm/model.hpp"

namespace ltdm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// A model description: alphabet, dictionary and parameters.
struct ModelSpec {
  std::vector<std::string> alphabet;
  Dictionary dictionary;
  ModelParams params;
  std::vector<std::vector<EventId>> c1_partition;
  bool fitted = false;
};

ModelSpec model_from_fixture(const std::string& name) {
  Fixture f = fixture_by_name(name);
  return {f.alphabet, f.dictionary, f.params, f.c1_partition, false};
}

// Accepts a ground-truth sidecar, a fit result, or {alphabet, dictionary, params}.
ModelSpec model_from_file(const fs::path& path) {
  json j = read_json_file(path);
  ModelSpec m;
  try {
    if (j.contains("classes")) {
      FitResult r = fit_result_from_json(j);
      m.alphabet = r.alphabet;
      m.dictionary = r.dictionary;
      m.params = r.params;
      m.fitted = true;
    } else {
      m.alphabet = j.at("alphabet").get<std::vector<std::string>>();
      m.dictionary = dictionary_from_json(j.at("dictionary"), m.alphabet);
      m.params = params_from_json(j.at("params"));
    }
  } catch (const json::exception& e) {
    throw MalformedRecord(path.string() + ": " + e.what());
  }
  m.params.validate(m.dictionary.size());
  return m;
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out.replace_extension();
  return fs::path(out.string() + suffix);
}

struct SimulateOpts {
  std::string fixture;
  std::string model;
  std::optional<std::size_t> m;
  std::uint64_t seed = 1;
  std::string out;
  std::string truth;
};

int cmd_simulate(const SimulateOpts& o, std::ostream& out) {
  if (o.fixture.empty() == o.model.empty())
    throw ContractViolation("simulate needs exactly one of --fixture or --model");
  ModelSpec spec;
  std::size_t m = 1000;
  if (!o.fixture.empty()) {
    spec = model_from_fixture(o.fixture);
    m = fixture_by_name(o.fixture).default_m;
  } else {
    spec = model_from_file(o.model);
  }
  if (o.m) m = *o.m;
  GeneratedData g = generate_dataset(spec.params, spec.dictionary, spec.alphabet, m, o.seed);
  fs::path data_path = o.out;
  fs::path truth_path = o.truth.empty() ? sibling(data_path, ".truth.json") : fs::path(o.truth);
  save_dataset(data_path, g.data);
  write_json_file(truth_path, truth_to_json(g.truth, spec.params, spec.dictionary, spec.alphabet));
  std::size_t events = 0;
  for (const auto& r : g.data.records) events += r.event_count();
  out << "records=" << g.data.size() << " events=" << events << " data=" << data_path.string()
      << " truth=" << truth_path.string() << "\n";
  return kOk;
}

struct FitOpts {
  std::string data;
  std::string out;
  std::string trace;
  std::string draws;
  FitConfig config;
  std::optional<std::size_t> burn_in;
  std::optional<double> tau;
  std::optional<std::size_t> S;
  std::optional<std::size_t> S0;
  bool no_time = false;
};

int cmd_fit(FitOpts o, std::ostream& out) {
  Dataset data = load_dataset(o.data);
  FitConfig cfg = o.config;
  cfg.burn_in = o.burn_in;
  cfg.tau = o.tau;
  cfg.add_count = o.S;
  cfg.init_count = o.S0;
  cfg.use_time = !o.no_time;
  cfg.keep_draws = !o.draws.empty();
  FitResult r = fit(data, cfg);
  fs::path out_path = o.out;
  write_json_file(out_path, fit_result_to_json(r));
  write_text_file(o.trace.empty() ? sibling(out_path, ".trace.csv") : fs::path(o.trace),
                  trace_to_csv(r));
  if (!o.draws.empty()) write_text_file(o.draws, draws_to_csv(r));
  out << "J_star=" << r.J_star << " dictionary=" << r.dictionary.size()
      << " fit=" << out_path.string() << "\n";
  return kOk;
}

struct EvaluateOpts {
  std::vector<std::string> fits;
  std::vector<std::string> truths;
  std::string csv;
  std::string json_out;
};

int cmd_evaluate(const EvaluateOpts& o, std::ostream& out) {
  if (o.truths.size() != 1 && o.truths.size() != o.fits.size())
    throw ContractViolation("give one --truth for all fits or one per fit");
  std::vector<ReplicationReport> runs;
  std::optional<ModelParams> first_truth;
  for (std::size_t k = 0; k < o.fits.size(); ++k) {
    ModelSpec truth = model_from_file(o.truths.size() == 1 ? o.truths[0] : o.truths[k]);
    FitResult fr = fit_result_from_json(read_json_file(o.fits[k]));
    fr.params.validate(fr.dictionary.size());
    if (!first_truth) {
      first_truth = truth.params;
    } else if (first_truth->classes() != truth.params.classes()) {
      throw MalformedRecord("truth files disagree on the number of classes");
    }
    auto alphabet = truth.alphabet;
    Dictionary est = remap_dictionary(fr.dictionary, fr.alphabet, alphabet);
    Dictionary tru = remap_dictionary(truth.dictionary, truth.alphabet, alphabet);
    runs.push_back(evaluate_replication(fs::path(o.fits[k]).filename().string(), fr.params, est,
                                        fr.J_star, truth.params, tru));
  }
  AggregateReport agg = aggregate(runs, *first_truth);
  if (!o.csv.empty()) write_text_file(o.csv, replications_to_csv(runs, first_truth->classes()));
  json j = aggregate_to_json(agg);
  if (!o.json_out.empty()) write_json_file(o.json_out, j);
  out << render_aggregate(j);
  return kOk;
}

struct PreprocessOpts {
  std::string log;
  std::string out;
  std::string keep_file;
  ColumnMap columns;
  std::string delimiter = ",";
  bool no_direction = false;
  std::vector<std::string> reset_tokens;
  std::vector<std::string> drop_tokens;
  std::string state_tag;
  bool repair_ties = false;
  double tie_jitter = 1e-6;
};

int cmd_preprocess(const PreprocessOpts& o, std::ostream& out, std::ostream& err) {
  if (o.delimiter.size() != 1) throw ContractViolation("delimiter must be one character");
  ColumnMap columns = o.columns;
  columns.delimiter = o.delimiter[0];
  PreprocessOptions opt;
  opt.policy.direction_change = !o.no_direction;
  if (!o.reset_tokens.empty()) opt.policy.reset_tokens = o.reset_tokens;
  if (!o.drop_tokens.empty()) opt.policy.drop_tokens = o.drop_tokens;
  if (!o.state_tag.empty()) opt.policy.state_tag = o.state_tag;
  opt.policy.repair_ties = o.repair_ties;
  opt.policy.tie_jitter = o.tie_jitter;
  if (!o.keep_file.empty()) {
    std::ifstream in(o.keep_file);
    if (!in) throw Error("cannot open " + o.keep_file);
    auto ids = std::make_shared<std::set<std::string>>();
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) ids->insert(line);
    opt.keep = [ids](const std::string& id) { return ids->contains(id); };
  }
  std::ifstream in(o.log, std::ios::binary);
  if (!in) throw Error("cannot open " + o.log);
  auto rows = read_log(in, columns);
  PreprocessSummary summary;
  Dataset data = preprocess(rows, opt, &summary);
  if (data.records.empty()) err << "warning: no records in " << o.log << "\n";
  if (summary.rows.unrecognized)
    err << "warning: " << summary.rows.unrecognized << " unrecognized rows dropped\n";
  if (summary.repaired_ties)
    err << "warning: " << summary.repaired_ties << " tied timestamps jittered\n";
  save_dataset(o.out, data);
  out << summary.line() << "\n";
  return kOk;
}

struct CheckIdOpts {
  std::string fixture;
  std::string model;
  std::string witnesses;
  std::string out;
  std::string witnesses_out;
  bool suggest = false;
  std::optional<double> lambda_eps;
};

int cmd_check_id(const CheckIdOpts& o, std::ostream& out) {
  if (o.fixture.empty() == o.model.empty())
    throw ContractViolation("check-id needs exactly one of --fixture or --model");
  ModelSpec spec = o.fixture.empty() ? model_from_file(o.model) : model_from_fixture(o.fixture);
  IdOptions opt;
  if (o.lambda_eps) {
    opt.lambda_eps = *o.lambda_eps;
  } else if (spec.fitted) {
    opt.lambda_eps = fitted_lambda_tolerance(spec.params.lambda);
  }
  C1Witness c1;
  C2Witness c2;
  bool suggested = false;
  if (!o.witnesses.empty()) {
    json w = read_json_file(o.witnesses);
    if (w.contains("C1")) c1 = c1_witness_from_json(w.at("C1"), spec.alphabet);
    if (w.contains("C2")) c2 = c2_witness_from_json(w.at("C2"), spec.alphabet);
  } else if (o.suggest || !o.fixture.empty()) {
    SuggestedWitnesses s = suggest_witnesses(spec.params, spec.dictionary, opt);
    c1 = s.c1;
    c2 = s.c2;
    if (!spec.c1_partition.empty()) {
      c1.per_group.clear();
      c1.default_blocks = spec.c1_partition;
    }
    suggested = true;
  }
  IdentifiabilityReport rep = check_identifiability(spec.params, spec.dictionary, c1, c2, opt);
  rep.witnesses_suggested = suggested;
  json j = report_to_json(rep, spec.alphabet);
  if (!o.out.empty()) write_json_file(o.out, j);
  if (!o.witnesses_out.empty())
    write_json_file(o.witnesses_out, witnesses_to_json(c1, c2, spec.alphabet));
  Verdict v = rep.overall();
  out << "A1=" << to_string(rep.a1) << " A2=" << (rep.a2_offenders.empty() ? "holds" : "fails")
      << " C1=" << to_string(rep.c1.verdict) << " C2=" << to_string(rep.c2.verdict)
      << " overall=" << to_string(v) << "\n";
  if (v == Verdict::Fail) return kConditionFailed;
  if (v == Verdict::CannotVerify) return kCannotVerify;
  return kOk;
}

struct ReportOpts {
  std::string in;
  std::string out;
};

int cmd_report(const ReportOpts& o, std::ostream& out) {
  std::string text = render_aggregate(read_json_file(o.in));
  if (!o.out.empty()) write_text_file(o.out, text);
  out << text;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent theme dictionary model toolkit", "ltdm"};
  app.set_config("--config", "", "INI or TOML file; [section] names a subcommand");
  app.require_subcommand(1);

  SimulateOpts sim;
  auto* s = app.add_subcommand("simulate", "Generate a dataset and its ground truth");
  s->add_option("--fixture", sim.fixture, "setting1..setting4");
  s->add_option("--model", sim.model, "JSON with alphabet, dictionary and params");
  s->add_option("--m", sim.m, "Number of records");
  s->add_option("--seed", sim.seed);
  s->add_option("--out", sim.out, "Dataset JSON")->required();
  s->add_option("--truth", sim.truth, "Ground-truth JSON (default <out>.truth.json)");

  FitOpts fo;
  auto* f = app.add_subcommand("fit", "Run the sampler");
  f->add_option("--data", fo.data)->required();
  f->add_option("--out", fo.out, "Fit result JSON")->required();
  f->add_option("--trace", fo.trace, "Trace CSV (default <out>.trace.csv)");
  f->add_option("--draws", fo.draws, "Per-draw CSV of retained iterations");
  f->add_option("--outer", fo.config.outer_iterations);
  f->add_option("--inner", fo.config.inner_sweeps);
  f->add_option("--burn-in", fo.burn_in);
  f->add_option("--tau", fo.tau, "Trim threshold (default 1/sqrt(m))");
  f->add_option("--S", fo.S, "Patterns added per class and length (default 2*M1)");
  f->add_option("--S0", fo.S0, "Initial patterns per length (default M1)");
  f->add_option("--L", fo.config.max_pattern_length, "Maximum pattern length");
  f->add_option("--J0", fo.config.initial_classes, "Initial number of classes");
  f->add_option("--split-merge", fo.config.split_merge_attempts,
                "Split-merge proposals per outer iteration");
  f->add_option("--trim-min-share", fo.config.trim_min_share);
  f->add_option("--seed", fo.config.seed);
  f->add_option("--threads", fo.config.threads)->check(CLI::PositiveNumber);
  f->add_flag("--no-time", fo.no_time, "Share one rate across classes");
  f->add_flag("--condition-on-K", fo.config.condition_on_K);
  f->add_flag("--freeze-dictionary", fo.config.freeze_dictionary);
  f->add_flag("--single-class", fo.config.single_class);

  EvaluateOpts ev;
  auto* e = app.add_subcommand("evaluate", "Compare fits with ground truth");
  e->add_option("--fit", ev.fits)->required();
  e->add_option("--truth", ev.truths)->required();
  e->add_option("--csv", ev.csv, "Per-replication CSV");
  e->add_option("--json", ev.json_out, "Aggregate JSON");

  PreprocessOpts pp;
  auto* p = app.add_subcommand("preprocess", "Turn a raw log into a dataset");
  p->add_option("--log", pp.log)->required();
  p->add_option("--out", pp.out)->required();
  p->add_option("--examinee-column", pp.columns.examinee);
  p->add_option("--event-number-column", pp.columns.event_number);
  p->add_option("--event-column", pp.columns.event);
  p->add_option("--time-column", pp.columns.time);
  p->add_option("--value-column", pp.columns.event_value);
  p->add_option("--delimiter", pp.delimiter);
  p->add_flag("--no-direction-split", pp.no_direction);
  p->add_option("--reset-token", pp.reset_tokens);
  p->add_option("--drop-token", pp.drop_tokens);
  p->add_option("--state-tag", pp.state_tag);
  p->add_flag("--repair-ties", pp.repair_ties);
  p->add_option("--tie-jitter", pp.tie_jitter);
  p->add_option("--keep-examinees", pp.keep_file, "File of examinee ids to keep, one per line");

  CheckIdOpts ci;
  auto* c = app.add_subcommand("check-id", "Check identifiability conditions");
  c->add_option("--fixture", ci.fixture);
  c->add_option("--model", ci.model, "Ground truth, fit result, or params JSON");
  c->add_option("--witnesses", ci.witnesses);
  c->add_flag("--suggest", ci.suggest, "Search for witnesses when none are given");
  c->add_option("--lambda-eps", ci.lambda_eps);
  c->add_option("--out", ci.out, "Report JSON");
  c->add_option("--witnesses-out", ci.witnesses_out);

  ReportOpts ro;
  auto* r = app.add_subcommand("report", "Render an aggregate JSON as text tables");
  r->add_option("--in", ro.in)->required();
  r->add_option("--out", ro.out);

  std::vector<const char*> argv{"ltdm"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (s->parsed()) return cmd_simulate(sim, out);
    if (f->parsed()) return cmd_fit(fo, out);
    if (e->parsed()) return cmd_evaluate(ev, out);
    if (p->parsed()) return cmd_preprocess(pp, out, err);
    if (c->parsed()) return cmd_check_id(ci, out);
    if (r->parsed()) return cmd_report(ro, out);
  } catch (const ContractViolation& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsage;
  } catch (const InvariantViolation& ex) {
    err << "internal error: " << ex.what() << "\n";
    return kInternal;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kDataError;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace ltdm::cli
