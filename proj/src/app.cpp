/*
 * Copyright 2026 The NAGO Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "nago/app.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "nago/architecture.hpp"
#include "nago/cost_model.hpp"
#include "nago/error.hpp"
#include "nago/generator.hpp"
#include "nago/mobo.hpp"
#include "nago/space_analytics.hpp"

namespace nago {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kLargeImageDatasets{"sport8", "mit67", "flowers102", "imagenet"};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ParameterError(path.string() + ": " + e.what());
  }
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<json> rows;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ParameterError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return rows;
}

// Writes to `path`, or stdout when the path is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  return cells;
}

bool parse_double(const std::string& text, double& value) {
  if (text.empty()) return false;
  char* end = nullptr;
  value = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size();
}

struct CsvTable {
  std::vector<std::string> header;  // empty without a header row
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& key) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == key) return i;
    }
    double index = 0.0;
    if (parse_double(key, index) && index >= 0 && index == std::floor(index)) return static_cast<std::size_t>(index);
    throw ParameterError("no column named '" + key + "'");
  }
};

// Numeric CSV. A first row that does not parse as numbers is the header.
CsvTable read_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  CsvTable table;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    std::vector<double> row;
    bool numeric = true;
    for (const auto& c : cells) {
      double v = 0.0;
      if (!parse_double(c, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (table.rows.empty() && table.header.empty()) {
        table.header = cells;
        continue;
      }
      throw ParameterError(path.string() + ":" + std::to_string(number) + ": non-numeric value");
    }
    if (!table.rows.empty() && row.size() != table.rows.front().size()) {
      throw ParameterError(path.string() + ":" + std::to_string(number) + ": ragged row");
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw ParameterError(path.string() + ": no data rows");
  return table;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> canonical(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& n : names) out.push_back(canonical_objective(n));
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const BudgetError*>(&e)) return "budget error";
  if (dynamic_cast<const InfeasibleSplitError*>(&e)) return "infeasible split";
  if (dynamic_cast<const InsufficientDataError*>(&e)) return "insufficient data";
  if (dynamic_cast<const ProtocolError*>(&e)) return "protocol error";
  if (dynamic_cast<const ParameterError*>(&e)) return "parameter error";
  if (dynamic_cast<const Error*>(&e)) return "error";
  return "internal error";
}

json kde_to_json(const KdeConfig& k) {
  return {{"gamma", k.gamma},
          {"min_bandwidth", k.min_bandwidth},
          {"candidates", k.candidates},
          {"random_fraction", k.random_fraction},
          {"bandwidth_factor", k.bandwidth_factor},
          {"min_points", k.min_points}};
}

KdeConfig kde_from_json(const json& doc) {
  KdeConfig k;
  k.gamma = doc.value("gamma", k.gamma);
  k.min_bandwidth = doc.value("min_bandwidth", k.min_bandwidth);
  k.candidates = doc.value("candidates", k.candidates);
  k.random_fraction = doc.value("random_fraction", k.random_fraction);
  k.bandwidth_factor = doc.value("bandwidth_factor", k.bandwidth_factor);
  k.min_points = doc.value("min_points", k.min_points);
  return k;
}

}  // namespace

std::int64_t default_param_budget(const std::string& dataset) {
  return kLargeImageDatasets.count(dataset) ? 6'000'000 : 4'000'000;
}

int dataset_resolution(const std::string& dataset) { return kLargeImageDatasets.count(dataset) ? 224 : 32; }

RunConfig RunConfig::resolved() const {
  RunConfig c = *this;
  if (c.command != "bohb" && c.command != "mobo") throw ParameterError("unknown search '" + c.command + "'");
  if (c.space != "hnag" && c.space != "rnag" && c.space != "box") {
    throw ParameterError("space must be hnag, rnag or box, got '" + c.space + "'");
  }
  c.blocks = search_blocks_name(parse_search_blocks(c.blocks));
  if (c.space == "box" && c.dimension < 1) throw ParameterError("box dimension must be positive");
  if (c.param_budget == 0) c.param_budget = default_param_budget(c.dataset);
  if (c.param_budget < 0) throw ParameterError("parameter budget must be positive");
  if (c.objectives.empty()) {
    c.objectives = c.command == "bohb" ? std::vector<std::string>{kValError}
                                       : std::vector<std::string>{kValError, kMemoryMb};
  }
  c.objectives = canonical(c.objectives);
  if (c.iterations == 0) c.iterations = c.command == "bohb" ? 60 : 30;
  if (c.iterations < 0) throw ParameterError("iterations must be positive");
  BudgetSchedule{c.budgets, c.eta}.validate();
  if (c.max_budget == 0.0) c.max_budget = c.budgets.back();
  if (!(c.max_budget > 0.0)) throw ParameterError("max budget must be positive");
  c.kde.validate();
  c.surrogate.validate();
  if (c.batch < 1 || c.candidates < 1) throw ParameterError("batch and candidates must be positive");
  if (!(c.budget > 0.0)) throw ParameterError("mobo budget must be positive");
  if (!c.reference.empty() && c.reference.size() != c.objectives.size()) {
    throw ParameterError("reference point needs one value per objective");
  }
  if (c.command == "bohb" && c.objectives.size() != 1) throw ParameterError("bohb optimizes a single objective");
  return c;
}

json to_json(const RunConfig& c) {
  return {{"command", c.command},
          {"space", c.space},
          {"blocks", c.blocks},
          {"dimension", c.dimension},
          {"dataset", c.dataset},
          {"param_budget", c.param_budget},
          {"evaluator", c.evaluator},
          {"objectives", c.objectives},
          {"seed", c.seed},
          {"output_dir", c.output_dir},
          {"threads", c.threads},
          {"max_budget", c.max_budget},
          {"budgets", c.budgets},
          {"eta", c.eta},
          {"iterations", c.iterations},
          {"kde", kde_to_json(c.kde)},
          {"batch", c.batch},
          {"candidates", c.candidates},
          {"budget", c.budget},
          {"init", c.init},
          {"reference", c.reference},
          {"surrogate", to_json(c.surrogate)}};
}

RunConfig run_config_from_json(const json& doc) {
  if (!doc.is_object()) throw ParameterError("run config must be a JSON object");
  try {
    RunConfig c;
    c.command = doc.value("command", c.command);
    c.space = doc.value("space", c.space);
    c.blocks = doc.value("blocks", c.blocks);
    c.dimension = doc.value("dimension", c.dimension);
    c.dataset = doc.value("dataset", c.dataset);
    c.param_budget = doc.value("param_budget", c.param_budget);
    c.evaluator = doc.value("evaluator", c.evaluator);
    c.objectives = doc.value("objectives", c.objectives);
    c.seed = doc.value("seed", c.seed);
    c.output_dir = doc.value("output_dir", c.output_dir);
    c.threads = doc.value("threads", c.threads);
    c.max_budget = doc.value("max_budget", c.max_budget);
    c.budgets = doc.value("budgets", c.budgets);
    c.eta = doc.value("eta", c.eta);
    c.iterations = doc.value("iterations", c.iterations);
    if (doc.contains("kde")) c.kde = kde_from_json(doc.at("kde"));
    c.batch = doc.value("batch", c.batch);
    c.candidates = doc.value("candidates", c.candidates);
    c.budget = doc.value("budget", c.budget);
    c.init = doc.value("init", c.init);
    c.reference = doc.value("reference", c.reference);
    if (doc.contains("surrogate")) c.surrogate = sghmc_config_from_json(doc.at("surrogate"));
    return c;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("bad run config: ") + e.what());
  }
}

SearchProblem make_problem(const RunConfig& config) {
  SearchProblem p;
  if (config.space == "hnag") {
    p.domain = SearchDomain::hnag(parse_search_blocks(config.blocks));
  } else if (config.space == "rnag") {
    p.domain = SearchDomain::rnag();
  } else {
    p.domain = SearchDomain::unit_box(config.dimension);
  }
  p.param_budget = config.param_budget;
  p.dataset = config.dataset;
  p.objectives = config.objectives;
  return p;
}

fs::path make_run_dir(const RunConfig& config) {
  const fs::path base =
      fs::path(config.output_dir) / (config.command + "-" + utc_timestamp() + "-s" + std::to_string(config.seed));
  fs::path dir = base;
  for (int i = 1; fs::exists(dir); ++i) dir = base.string() + "-" + std::to_string(i);
  return dir;
}

namespace {

json archive_entry_json(const ArchiveEntry& e, const std::vector<std::string>& names) {
  json objectives = json::object();
  for (std::size_t k = 0; k < names.size(); ++k) objectives[names[k]] = e.objectives[k];
  return {{"trial_id", e.trial_id}, {"unit", e.unit}, {"theta", e.theta}, {"objectives", objectives}};
}

}  // namespace

void execute_run(const RunConfig& raw, const fs::path& run_dir) {
  const RunConfig config = raw.resolved();
  const SearchProblem problem = make_problem(config);
  EvaluatorOptions eo;
  eo.builtin.max_budget = config.max_budget;
  eo.proxy.max_budget = config.max_budget;
  eo.proxy.memory.input_resolution = dataset_resolution(config.dataset);
  eo.proxy.threads = config.threads;
  auto evaluator = make_evaluator(config.evaluator, eo);

  fs::create_directories(run_dir);
  write_text(run_dir / "config.json", to_json(config).dump(2) + "\n");
  std::ofstream history(run_dir / "history.jsonl", std::ios::binary);
  if (!history) throw Error("cannot write " + (run_dir / "history.jsonl").string());
  auto on_trial = [&](const Trial& t) { history << to_json(t).dump() << "\n" << std::flush; };

  json summary = {{"command", config.command}, {"evaluator", evaluator->describe()}, {"seed", config.seed}};
  if (config.command == "bohb") {
    BohbConfig bc;
    bc.schedule = BudgetSchedule{config.budgets, config.eta};
    bc.iterations = config.iterations;
    bc.kde = config.kde;
    bc.seed = config.seed;
    bc.objective = config.objectives.front();
    const BohbResult result = run_bohb(problem, *evaluator, bc, on_trial);
    summary["trials"] = result.history.size();
    summary["total_cost"] = result.total_cost;
    summary["best"] = result.best ? to_json(*result.best) : json(nullptr);
  } else {
    std::vector<Trial> init;
    if (!config.init.empty()) {
      for (const auto& row : read_jsonl(config.init)) init.push_back(trial_from_json(row));
    }
    MoboConfig mc;
    mc.iterations = config.iterations;
    mc.batch = config.batch;
    mc.candidates = config.candidates;
    mc.budget = config.budget;
    mc.surrogate = config.surrogate;
    mc.reference = config.reference;
    mc.seed = config.seed;
    mc.threads = config.threads;
    const MoboResult result = run_mobo(problem, *evaluator, mc, init, on_trial);
    std::string archive;
    for (const auto& e : result.archive.entries()) archive += archive_entry_json(e, config.objectives).dump() + "\n";
    write_text(run_dir / "archive.jsonl", archive);
    summary["trials"] = result.history.size();
    summary["init_trials"] = init.size();
    summary["archive_size"] = result.archive.size();
    summary["fallbacks"] = result.fallbacks;
    summary["objectives"] = config.objectives;
    if (!result.hypervolume_trace.empty()) summary["hypervolume_trace"] = result.hypervolume_trace;
  }
  history.close();
  write_text(run_dir / "summary.json", summary.dump(2) + "\n");
}

namespace {

using Action = std::function<int()>;

ArchitectureIR sample_ir(const std::string& space, const json& theta, std::uint64_t seed, std::int64_t budget) {
  if (space == "hnag") return sample_hnag(hnag_theta_from_json(theta), seed, budget);
  if (space == "rnag") return sample_rnag(rnag_theta_from_json(theta), seed, budget);
  throw ParameterError("space must be hnag or rnag, got '" + space + "'");
}

void add_sample(CLI::App& app, Action& action) {
  auto* sub = app.add_subcommand("sample", "Sample one architecture and write its IR as JSON");
  auto space = std::make_shared<std::string>("hnag");
  auto theta = std::make_shared<std::string>();
  auto seed = std::make_shared<std::uint64_t>(0);
  auto budget = std::make_shared<std::int64_t>(4'000'000);
  auto out = std::make_shared<std::string>();
  sub->add_option("--space", *space, "hnag or rnag")->check(CLI::IsMember({"hnag", "rnag"}))->capture_default_str();
  sub->add_option("--theta", *theta, "Hyperparameter JSON file (default hyperparameters when omitted)");
  sub->add_option("--seed", *seed, "Architecture seed")->capture_default_str();
  sub->add_option("--budget", *budget, "Parameter budget")->capture_default_str();
  sub->add_option("--out", *out, "Output file (stdout when omitted)");
  sub->callback([&action, sub, space, theta, seed, budget, out] {
    (void)sub;
    action = [=] {
      json doc;
      if (!theta->empty()) {
        doc = read_json(*theta);
      } else {
        doc = *space == "hnag" ? to_json(GeneratorHyperparams{}) : to_json(RnagHyperparams{});
      }
      emit(*out, to_json(sample_ir(*space, doc, *seed, *budget)).dump(2) + "\n");
      return kExitOk;
    };
  });
}

void add_cost(CLI::App& app, Action& action) {
  auto* sub = app.add_subcommand("cost", "Price IR files: parameters, memory, FLOPs and time proxy");
  auto files = std::make_shared<std::vector<std::string>>();
  auto resolution = std::make_shared<int>(32);
  auto no_norm = std::make_shared<bool>(false);
  auto as_json = std::make_shared<bool>(false);
  sub->add_option("files", *files, "IR JSON files")->required();
  sub->add_option("--resolution", *resolution, "Input resolution")->capture_default_str();
  sub->add_flag("--no-norm", *no_norm, "Leave normalization parameters out of the count");
  sub->add_flag("--json", *as_json, "Print JSON instead of a table");
  sub->callback([&action, files, resolution, no_norm, as_json] {
    action = [=] {
      MemoryOptions mem;
      mem.input_resolution = *resolution;
      CostOptions opts;
      opts.count_norm = !*no_norm;
      json all = json::array();
      std::ostringstream table;
      char line[256];
      std::snprintf(line, sizeof line, "%-32s %12s %12s %16s %12s\n", "file", "params", "memory_mb", "flops",
                    "time_proxy");
      table << line;
      for (const auto& f : *files) {
        const CostReport r = price(ir_from_json(read_json(f)), mem, opts);
        all.push_back({{"file", f}, {"cost", to_json(r)}});
        std::snprintf(line, sizeof line, "%-32s %12lld %12.3f %16lld %12.6f\n", f.c_str(),
                      static_cast<long long>(r.param_count), r.memory_mb, static_cast<long long>(r.flops),
                      r.time_proxy);
        table << line;
      }
      std::cout << (*as_json ? all.dump(2) + "\n" : table.str());
      return kExitOk;
    };
  });
}

void add_space_options(CLI::App* sub, SpaceSampleOptions& opts, std::uint64_t& seed) {
  sub->add_option("--space", opts.space, "hnag or rnag")
      ->transform(CLI::CheckedTransformer(std::map<std::string, SpaceKind>{{"hnag", SpaceKind::Hnag},
                                                                           {"rnag", SpaceKind::Rnag}}));
  sub->add_option("--seed", seed, "Root seed")->capture_default_str();
  sub->add_option("--budget", opts.param_budget, "Parameter budget")->capture_default_str();
  sub->add_option("--resolution", opts.memory.input_resolution, "Input resolution")->capture_default_str();
  sub->add_option("--threads", opts.threads, "Worker threads (0: all cores)")->capture_default_str();
}

void add_analyze(CLI::App& app, Action& action) {
  auto* analyze = app.add_subcommand("analyze", "Search-space analytics");
  analyze->require_subcommand(1);

  {
    auto* sub = analyze->add_subcommand("cardinality", "Count architectures in the hierarchical space");
    auto p = std::make_shared<CardinalityParams>();
    auto max = std::make_shared<int>(10);
    auto max_o = std::make_shared<int>(0), max_c = std::make_shared<int>(0), max_s = std::make_shared<int>(0);
    sub->add_option("--max", *max, "Maximum node count at every level")->capture_default_str();
    sub->add_option("--max-top", *max_o, "Override the top-level maximum");
    sub->add_option("--max-mid", *max_c, "Override the mid-level maximum");
    sub->add_option("--max-bottom", *max_s, "Override the bottom-level maximum");
    sub->add_option("--ops", p->m, "Operation choices per bottom node")->capture_default_str();
    sub->callback([&action, p, max, max_o, max_c, max_s] {
      action = [=] {
        CardinalityParams c = *p;
        c.n_o_max = *max_o ? *max_o : *max;
        c.n_c_max = *max_c ? *max_c : *max;
        c.n_s_max = *max_s ? *max_s : *max;
        const BigInt t = hnag_cardinality(c);
        const BigInt darts = darts_cardinality();
        std::cout << "T = " << t.str() << "\n"
                  << "≈" << scientific(t) << "\n"
                  << "darts = " << darts.str() << " (≈" << scientific(darts) << ")\n";
        return kExitOk;
      };
    });
  }
  {
    auto* sub = analyze->add_subcommand("histogram", "Estimated-memory histogram of uniformly sampled architectures");
    auto opts = std::make_shared<SpaceSampleOptions>();
    auto seed = std::make_shared<std::uint64_t>(0);
    auto samples = std::make_shared<int>(300);
    auto bins = std::make_shared<int>(0);
    auto out = std::make_shared<std::string>();
    add_space_options(sub, *opts, *seed);
    sub->add_option("--samples", *samples, "Number of architectures")->capture_default_str();
    sub->add_option("--bins", *bins, "Bin count (0: Freedman-Diaconis)")->capture_default_str();
    sub->add_option("--out", *out, "CSV file (stdout when omitted)");
    sub->callback([&action, opts, seed, samples, bins, out] {
      action = [=] {
        const MemoryHistogram h = memory_histogram(*samples, *seed, *opts, *bins);
        emit(*out, histogram_csv(h.histogram));
        if (!out->empty()) {
          std::cout << to_string(opts->space) << " memory_mb range " << fmt(h.histogram.edges.front()) << " .. "
                    << fmt(h.histogram.edges.back()) << "\n";
        }
        return kExitOk;
      };
    });
  }
  {
    auto* sub = analyze->add_subcommand("study", "Per-hyperparameter spread of cost-model metrics");
    auto opts = std::make_shared<SpaceSampleOptions>();
    auto seed = std::make_shared<std::uint64_t>(0);
    auto thetas = std::make_shared<int>(300);
    auto draws = std::make_shared<int>(8);
    auto out = std::make_shared<std::string>();
    add_space_options(sub, *opts, *seed);
    sub->add_option("--thetas", *thetas, "Number of hyperparameter draws")->capture_default_str();
    sub->add_option("--draws", *draws, "Architectures per hyperparameter draw")->capture_default_str();
    sub->add_option("--out", *out, "CSV file (stdout when omitted)");
    sub->callback([&action, opts, seed, thetas, draws, out] {
      action = [=] {
        const auto rows = sample_study(*thetas, *draws, *seed, *opts);
        emit(*out, study_csv(rows));
        return kExitOk;
      };
    });
  }
  {
    auto* sub = analyze->add_subcommand("rankcorr", "Spearman rank correlation between two CSV columns");
    auto in = std::make_shared<std::string>();
    auto x = std::make_shared<std::string>("0");
    auto y = std::make_shared<std::string>("1");
    sub->add_option("--in", *in, "CSV file")->required();
    sub->add_option("--x", *x, "First column, by header name or index")->capture_default_str();
    sub->add_option("--y", *y, "Second column, by header name or index")->capture_default_str();
    sub->callback([&action, in, x, y] {
      action = [=] {
        const CsvTable t = read_csv(*in);
        const std::size_t cx = t.column(*x), cy = t.column(*y);
        if (cx >= t.rows.front().size() || cy >= t.rows.front().size()) throw ParameterError("column out of range");
        std::vector<std::pair<double, double>> pairs;
        for (const auto& r : t.rows) pairs.emplace_back(r[cx], r[cy]);
        std::cout << "spearman " << fmt(rank_correlation(pairs)) << "\n";
        return kExitOk;
      };
    });
  }
}

SurrogateDataset dataset_from_csv(const CsvTable& t) {
  if (t.rows.front().size() < 2) throw ParameterError("surrogate data needs input columns and a target column");
  SurrogateDataset d;
  for (const auto& r : t.rows) {
    d.inputs.emplace_back(r.begin(), r.end() - 1);
    d.targets.push_back(r.back());
  }
  return d;
}

void add_surrogate(CLI::App& app, Action& action) {
  auto* surrogate = app.add_subcommand("surrogate", "Bayesian neural network surrogate");
  surrogate->require_subcommand(1);
  {
    auto* sub = surrogate->add_subcommand("fit", "Fit an SGHMC ensemble to CSV data (last column is the target)");
    auto data = std::make_shared<std::string>();
    auto config = std::make_shared<std::string>();
    auto noise = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>(0);
    auto out = std::make_shared<std::string>();
    sub->add_option("--data", *data, "Training CSV")->required();
    sub->add_option("--config", *config, "Sampler settings JSON");
    auto* noise_opt = sub->add_option("--noise", *noise, "het or hom")->check(CLI::IsMember({"het", "hom"}));
    auto* seed_opt = sub->add_option("--seed", *seed, "Sampler seed");
    sub->add_option("--out", *out, "Model JSON file")->required();
    sub->callback([&action, data, config, noise, seed, out, noise_opt, seed_opt] {
      const bool set_noise = noise_opt->count() > 0, set_seed = seed_opt->count() > 0;
      action = [=] {
        SghmcConfig cfg = config->empty() ? SghmcConfig{} : sghmc_config_from_json(read_json(*config));
        if (set_noise) cfg.noise = noise_model_from_string(*noise);
        if (set_seed) cfg.seed = *seed;
        const BnnEnsemble model = fit_bnn(dataset_from_csv(read_csv(*data)), cfg);
        write_text(*out, model.to_json().dump() + "\n");
        std::cout << "kept " << model.sample_count() << " samples\n";
        return kExitOk;
      };
    });
  }
  {
    auto* sub = surrogate->add_subcommand("predict", "Posterior mean and variance for CSV inputs");
    auto model = std::make_shared<std::string>();
    auto data = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    sub->add_option("--model", *model, "Model JSON file")->required();
    sub->add_option("--data", *data, "Input CSV; extra trailing columns are ignored")->required();
    sub->add_option("--out", *out, "CSV file (stdout when omitted)");
    sub->callback([&action, model, data, out] {
      action = [=] {
        const BnnEnsemble m = BnnEnsemble::from_json(read_json(*model));
        const CsvTable t = read_csv(*data);
        const auto d = static_cast<std::size_t>(m.input_dim());
        if (t.rows.front().size() < d) throw ParameterError("input CSV has fewer columns than the model inputs");
        std::vector<std::vector<double>> xs;
        for (const auto& r : t.rows) xs.emplace_back(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(d));
        std::string csv = "mean,variance,stddev\n";
        for (const auto& p : m.predict_batch(xs)) csv += fmt(p.mean) + "," + fmt(p.variance) + "," + fmt(p.stddev()) + "\n";
        emit(*out, csv);
        return kExitOk;
      };
    });
  }
  {
    auto* sub = surrogate->add_subcommand("nll", "Mean Gaussian NLL and RMSE on labelled CSV data");
    auto model = std::make_shared<std::string>();
    auto data = std::make_shared<std::string>();
    sub->add_option("--model", *model, "Model JSON file")->required();
    sub->add_option("--data", *data, "Labelled CSV (last column is the target)")->required();
    sub->callback([&action, model, data] {
      action = [=] {
        const BnnEnsemble m = BnnEnsemble::from_json(read_json(*model));
        const SurrogateDataset d = dataset_from_csv(read_csv(*data));
        const auto post = m.predict_batch(d.inputs);
        std::cout << "nll " << fmt(gaussian_nll(post, d.targets)) << "\nrmse " << fmt(rmse(post, d.targets)) << "\n";
        return kExitOk;
      };
    });
  }
}

void add_search(CLI::App& app, Action& action) {
  auto* search = app.add_subcommand("search", "Run a search and record it in a run directory");
  search->require_subcommand(1);
  for (const std::string name : {"bohb", "mobo"}) {
    auto* sub = search->add_subcommand(name, name == "bohb" ? "Multi-fidelity single-objective search"
                                                            : "Batch multi-objective Bayesian optimization");
    auto cli = std::make_shared<RunConfig>();
    auto config_path = std::make_shared<std::string>();
    auto run_dir = std::make_shared<std::string>();
    auto overrides =
        std::make_shared<std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&, const RunConfig&)>>>>();
    auto bind = [&](CLI::Option* opt, std::function<void(RunConfig&, const RunConfig&)> copy) {
      overrides->emplace_back(opt, std::move(copy));
    };
    RunConfig& c = *cli;
    sub->add_option("--config", *config_path, "Replay or extend a saved config.json; flags override its values");
    sub->add_option("--run-dir", *run_dir, "Exact run directory instead of a timestamped one");
    bind(sub->add_option("--space", c.space, "hnag, rnag or box")->capture_default_str(),
         [](RunConfig& d, const RunConfig& s) { d.space = s.space; });
    bind(sub->add_option("--blocks", c.blocks, "graph, merge-op, stage-channel or graph+merge+op+stage+channel")
             ->capture_default_str(),
         [](RunConfig& d, const RunConfig& s) { d.blocks = s.blocks; });
    bind(sub->add_option("--dim", c.dimension, "Dimension of the box space")->capture_default_str(),
         [](RunConfig& d, const RunConfig& s) { d.dimension = s.dimension; });
    bind(sub->add_option("--dataset", c.dataset, "Dataset name sent to evaluators")->capture_default_str(),
         [](RunConfig& d, const RunConfig& s) { d.dataset = s.dataset; });
    bind(sub->add_option("--param-budget", c.param_budget, "Parameter budget (default 4M, 6M for large images)"),
         [](RunConfig& d, const RunConfig& s) { d.param_budget = s.param_budget; });
    bind(sub->add_option("--evaluator", c.evaluator, "builtin:<name>, proxy, worker or worker:<cmd>")
             ->capture_default_str(),
         [](RunConfig& d, const RunConfig& s) { d.evaluator = s.evaluator; });
    bind(sub->add_option("--objectives", c.objectives, "Comma-separated objectives (error, memory, time, ...)")
             ->delimiter(','),
         [](RunConfig& d, const RunConfig& s) { d.objectives = s.objectives; });
    bind(sub->add_option("--seed", c.seed, "Root seed")->capture_default_str(),
         [](RunConfig& d, const RunConfig& s) { d.seed = s.seed; });
    bind(sub->add_option("--out", c.output_dir, "Parent directory of run directories")->capture_default_str(),
         [](RunConfig& d, const RunConfig& s) { d.output_dir = s.output_dir; });
    bind(sub->add_option("--threads", c.threads, "Worker threads (0: all cores)")->capture_default_str(),
         [](RunConfig& d, const RunConfig& s) { d.threads = s.threads; });
    bind(sub->add_option("--max-budget", c.max_budget, "Full-fidelity budget of builtin and proxy evaluators"),
         [](RunConfig& d, const RunConfig& s) { d.max_budget = s.max_budget; });
    bind(sub->add_option("--iterations", c.iterations, "Iterations (default 60 bohb, 30 mobo)"),
         [](RunConfig& d, const RunConfig& s) { d.iterations = s.iterations; });
    if (name == "bohb") {
      bind(sub->add_option("--budgets", c.budgets, "Comma-separated budgets")->delimiter(',')->capture_default_str(),
           [](RunConfig& d, const RunConfig& s) { d.budgets = s.budgets; });
      bind(sub->add_option("--eta", c.eta, "Halving rate")->capture_default_str(),
           [](RunConfig& d, const RunConfig& s) { d.eta = s.eta; });
    } else {
      bind(sub->add_option("--batch", c.batch, "Evaluations per iteration")->capture_default_str(),
           [](RunConfig& d, const RunConfig& s) { d.batch = s.batch; });
      bind(sub->add_option("--candidates", c.candidates, "Acquisition candidate pool size")->capture_default_str(),
           [](RunConfig& d, const RunConfig& s) { d.candidates = s.candidates; });
      bind(sub->add_option("--budget", c.budget, "Training budget per evaluation")->capture_default_str(),
           [](RunConfig& d, const RunConfig& s) { d.budget = s.budget; });
      bind(sub->add_option("--init", c.init, "history.jsonl to warm start from"),
           [](RunConfig& d, const RunConfig& s) { d.init = s.init; });
      bind(sub->add_option("--ref", c.reference, "Reference point for the hypervolume trace")->delimiter(','),
           [](RunConfig& d, const RunConfig& s) { d.reference = s.reference; });
    }
    sub->callback([&action, name, cli, config_path, run_dir, overrides] {
      RunConfig config = *cli;
      if (!config_path->empty()) {
        config = run_config_from_json(read_json(*config_path));
        if (config.command != name) throw CLI::ValidationError("--config", "file holds a " + config.command + " run");
        for (const auto& [opt, copy] : *overrides) {
          if (opt->count() > 0) copy(config, *cli);
        }
      }
      config.command = name;
      const std::string dir = *run_dir;
      action = [config, dir] {
        const RunConfig resolved = config.resolved();
        const fs::path path = dir.empty() ? make_run_dir(resolved) : fs::path(dir);
        execute_run(resolved, path);
        std::cout << path.string() << "\n";
        return kExitOk;
      };
    });
  }
}

// The IR named by --ir, or rebuilt from a trial of a search history.
ArchitectureIR load_ir(const std::string& ir, const std::string& history, int trial) {
  if (!ir.empty()) return ir_from_json(read_json(ir));
  if (history.empty()) throw ParameterError("give --ir or --history with --trial");
  RunConfig config;
  const fs::path sibling = fs::path(history).parent_path() / "config.json";
  if (fs::exists(sibling)) config = run_config_from_json(read_json(sibling));
  const RunConfig resolved = config.resolved();
  for (const auto& row : read_jsonl(history)) {
    const Trial t = trial_from_json(row);
    if (t.id == trial) return sample_ir(resolved.space, t.theta, t.seed, resolved.param_budget);
  }
  throw ParameterError("trial " + std::to_string(trial) + " not found in " + history);
}

void add_export(CLI::App& app, Action& action) {
  auto* exp = app.add_subcommand("export", "Export an architecture as DOT or JSON");
  exp->require_subcommand(1);
  for (const std::string format : {"dot", "json"}) {
    auto* sub = exp->add_subcommand(format, format == "dot" ? "Graphviz DOT" : "IR JSON");
    auto ir = std::make_shared<std::string>();
    auto history = std::make_shared<std::string>();
    auto trial = std::make_shared<int>(0);
    auto out = std::make_shared<std::string>();
    sub->add_option("--ir", *ir, "IR JSON file");
    sub->add_option("--history", *history, "history.jsonl of a run (space and budget read from its config.json)");
    sub->add_option("--trial", *trial, "Trial id within the history")->capture_default_str();
    sub->add_option("--out", *out, "Output file (stdout when omitted)");
    sub->callback([&action, format, ir, history, trial, out] {
      action = [=] {
        const ArchitectureIR a = load_ir(*ir, *history, *trial);
        emit(*out, format == "dot" ? to_dot(a) : to_json(a).dump(2) + "\n");
        return kExitOk;
      };
    });
  }
}

void add_report(CLI::App& app, Action& action) {
  auto* report = app.add_subcommand("report", "Plot-ready summaries of finished runs");
  report->require_subcommand(1);
  {
    auto* sub = report->add_subcommand("pareto", "Nondominated trials of a history or archive as CSV");
    auto in = std::make_shared<std::string>();
    auto objectives = std::make_shared<std::vector<std::string>>(std::vector<std::string>{"error", "memory"});
    auto ref = std::make_shared<std::vector<double>>();
    auto out = std::make_shared<std::string>();
    sub->add_option("--in", *in, "history.jsonl or archive.jsonl")->required();
    sub->add_option("--objectives", *objectives, "Comma-separated objectives")->delimiter(',')->capture_default_str();
    sub->add_option("--ref", *ref, "Reference point; prints the hypervolume")->delimiter(',');
    sub->add_option("--out", *out, "CSV file (stdout when omitted)");
    sub->callback([&action, in, objectives, ref, out] {
      action = [=] {
        const auto names = canonical(*objectives);
        if (!ref->empty() && ref->size() != names.size()) throw ParameterError("--ref needs one value per objective");
        std::vector<int> ids;
        std::vector<std::vector<double>> points;
        for (const auto& row : read_jsonl(*in)) {
          if (row.value("status", std::string("ok")) != "ok") continue;
          const auto& obj = row.at("objectives");
          std::vector<double> p;
          for (const auto& n : names) {
            if (!obj.contains(n) || !obj.at(n).is_number()) break;
            p.push_back(obj.at(n).get<double>());
          }
          if (p.size() != names.size()) continue;
          ids.push_back(row.contains("trial_id") ? row.at("trial_id").get<int>() : row.at("id").get<int>());
          points.push_back(std::move(p));
        }
        auto front = pareto_filter(points);
        std::sort(front.begin(), front.end(), [&](std::size_t a, std::size_t b) {
          return points[a] != points[b] ? points[a] < points[b] : ids[a] < ids[b];
        });
        std::string csv = "trial_id";
        for (const auto& n : names) csv += "," + n;
        csv += "\n";
        for (std::size_t i : front) {
          csv += std::to_string(ids[i]);
          for (double v : points[i]) csv += "," + fmt(v);
          csv += "\n";
        }
        emit(*out, csv);
        if (!ref->empty()) {
          std::vector<std::vector<double>> fp;
          for (std::size_t i : front) fp.push_back(points[i]);
          (out->empty() ? std::cerr : std::cout) << "hypervolume " << fmt(hypervolume(fp, *ref)) << "\n";
        }
        return kExitOk;
      };
    });
  }
  {
    auto* sub = report->add_subcommand("history", "Trial history as CSV with the running incumbent");
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    sub->add_option("--in", *in, "history.jsonl")->required();
    sub->add_option("--out", *out, "CSV file (stdout when omitted)");
    sub->callback([&action, in, out] {
      action = [=] {
        std::vector<Trial> trials;
        std::set<std::string> names;
        for (const auto& row : read_jsonl(*in)) {
          trials.push_back(trial_from_json(row));
          for (const auto& [k, v] : trials.back().objectives) names.insert(k);
        }
        std::string csv = "id,config_id,bracket,rung,budget,status,objective,incumbent";
        for (const auto& n : names) csv += "," + n;
        csv += "\n";
        double incumbent = std::numeric_limits<double>::infinity();
        for (const auto& t : trials) {
          const bool ok = t.status == TrialStatus::Ok;
          if (ok) incumbent = std::min(incumbent, t.objective);
          csv += std::to_string(t.id) + "," + std::to_string(t.config_id) + "," + std::to_string(t.bracket) + "," +
                 std::to_string(t.rung) + "," + fmt(t.budget) + "," + (ok ? "ok" : "failed") + "," +
                 (ok ? fmt(t.objective) : "") + "," + (std::isfinite(incumbent) ? fmt(incumbent) : "");
          for (const auto& n : names) {
            const auto it = t.objectives.find(n);
            csv += "," + (it != t.objectives.end() ? fmt(it->second) : std::string());
          }
          csv += "\n";
        }
        emit(*out, csv);
        return kExitOk;
      };
    });
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Hierarchical neural architecture generator search toolkit", "nago"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success, 1 runtime error, 2 usage error.\n"
      "Watts-Strogatz graphs connect floor(k/2) neighbours per side, so odd k behaves as k-1.");
  Action action;
  add_sample(app, action);
  add_cost(app, action);
  add_analyze(app, action);
  add_surrogate(app, action);
  add_search(app, action);
  add_export(app, action);
  add_report(app, action);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "nago: " << error_kind(e) << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  if (!action) return kExitUsage;
  try {
    return action();
  } catch (const std::exception& e) {
    std::cerr << "nago: " << error_kind(e) << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace nago
