// Command-line front end: configure, ingest, query, bench.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "omnisketch/format.hpp"
#include "omnisketch/omnisketch.hpp"
#include "omnisketch/oracle.hpp"
#include "omnisketch/params.hpp"
#include "omnisketch/snapshot.hpp"
#include "omnisketch/workload.hpp"

namespace os = omnisketch;
using nlohmann::json;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 2, kConfig = 3, kRuntime = 4 };

auto exit_code_for(os::Errc code) -> int {
  switch (code) {
    case os::Errc::parse_error:
    case os::Errc::query_parse_error:
    case os::Errc::unknown_attribute:
    case os::Errc::duplicate_attribute:
    case os::Errc::out_of_domain:
    case os::Errc::empty_query:
    case os::Errc::schema_mismatch:
    case os::Errc::invalid_spec:
      return kUsage;
    case os::Errc::invalid_width:
    case os::Errc::invalid_bit_width:
    case os::Errc::invalid_epsilon_delta:
    case os::Errc::epsilon_out_of_range:
    case os::Errc::budget_too_small:
    case os::Errc::invalid_sample_size:
    case os::Errc::domain_not_power_of_two:
      return kConfig;
    case os::Errc::snapshot_error:
    case os::Errc::estimator_schema_mismatch:
    case os::Errc::range_predicate_unsupported:
      return kRuntime;
  }
  return kRuntime;
}

struct Common {
  double epsilon = 0.1;
  double delta = 0.1;
  std::string memory = "10MB";
  std::size_t attrs = 0;
  std::string schema_path;
  std::optional<std::uint64_t> seed;
  std::uint64_t sample_size = 0;  // explicit B, skips the solver
};

void add_sketch_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--epsilon", c.epsilon, "Error parameter")->capture_default_str();
  cmd->add_option("--delta", c.delta, "Failure probability")->capture_default_str();
  cmd->add_option("--memory", c.memory, "Memory budget, e.g. 10MB (suffixes B, KB, MB, GB)")->capture_default_str();
  cmd->add_option("--sample-size", c.sample_size, "Use this sample size instead of solving for it");
}

void add_schema_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--attrs", c.attrs, "Number of numeric attributes named a1..ak");
  cmd->add_option("--schema", c.schema_path, "Schema JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Master seed (OMNI_SEED overrides)");
}

auto read_text(const std::string& path) -> std::string {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

auto load_schema(const Common& c) -> os::SchemaConfig {
  if (!c.schema_path.empty()) {
    json j;
    try {
      j = json::parse(read_text(c.schema_path));
    } catch (const json::parse_error& e) {
      throw os::Error(os::Errc::parse_error, std::string("schema: ") + e.what());
    }
    return os::SchemaConfig::from_json(j);
  }
  if (c.attrs == 0) throw os::Error(os::Errc::parse_error, "one of --attrs or --schema is required");
  return os::SchemaConfig::numeric(c.attrs);
}

// OMNI_SEED > --seed > schema seed > 0
auto resolve_seed(const Common& c, const os::SchemaConfig* schema) -> std::uint64_t {
  if (const char* env = std::getenv("OMNI_SEED")) {
    auto v = os::detail::parse_u64(env);
    if (!v) throw os::Error(os::Errc::parse_error, "OMNI_SEED is not an unsigned integer");
    return *v;
  }
  if (c.seed) return *c.seed;
  if (schema && schema->seed()) return *schema->seed();
  return 0;
}

auto make_params(const Common& c, std::size_t grids, std::uint64_t seed) -> os::SketchParams {
  if (c.sample_size > 0) return os::SketchParams::with_sample_size(c.epsilon, c.delta, grids, c.sample_size, seed);
  return os::configure(c.epsilon, c.delta, os::parse_memory_bits(c.memory), grids, seed);
}

auto params_json(const os::SketchParams& p) -> json {
  return {{"epsilon", p.epsilon},
          {"delta", p.delta},
          {"memory_bits", p.memory_bits},
          {"attribute_grids", p.attribute_count},
          {"width", p.width},
          {"depth", p.depth},
          {"sample_size", p.sample_size},
          {"fingerprint_bits", p.fingerprint_bits},
          {"epsilon1", p.epsilon1},
          {"epsilon2", p.epsilon2},
          {"delta1", p.delta1},
          {"delta2", p.delta2},
          {"seed", p.master_seed}};
}

auto estimate_json(const os::Estimate& e) -> json {
  return {{"value", e.value},
          {"intersection_size", e.intersection_size},
          {"n_max", e.n_max},
          {"below_sanity", e.below_sanity},
          {"sanity_threshold", e.sanity_threshold},
          {"fallback_value", e.fallback_value}};
}

auto cmd_configure(const Common& c, bool as_json) -> int {
  const auto schema = load_schema(c);
  const auto p = make_params(c, schema.schema().grid_count(), resolve_seed(c, &schema));
  if (as_json) {
    std::cout << params_json(p).dump() << '\n';
    return kOk;
  }
  std::cout << "w=" << p.width << "\n"
            << "d=" << p.depth << "\n"
            << "B=" << p.sample_size << "\n"
            << "b=" << p.fingerprint_bits << "\n"
            << "attribute_grids=" << p.attribute_count << "\n"
            << "memory_bits=" << p.memory_bits << "\n"
            << "seed=" << p.master_seed << "\n";
  return kOk;
}

auto cmd_ingest(const Common& c, const std::string& input, const std::string& snapshot_path) -> int {
  auto schema = load_schema(c);
  const auto params = make_params(c, schema.schema().grid_count(), resolve_seed(c, &schema));
  os::OmniSketch sketch(params, schema.schema());

  std::ifstream file;
  std::istream* in = &std::cin;
  if (input != "-") {
    file.open(input);
    if (!file) throw std::runtime_error("cannot open '" + input + "'");
    in = &file;
  }
  const auto start = std::chrono::steady_clock::now();
  os::read_records_csv(*in, schema, [&](os::Record&& r) { sketch.insert(r); });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ofstream out(snapshot_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + snapshot_path + "'");
  os::save_snapshot(out, sketch, &schema);
  out.close();
  if (!out) throw os::Error(os::Errc::snapshot_error, "failed writing '" + snapshot_path + "'");

  const auto n = sketch.stream_length();
  std::cout << "ingested " << n << " records in " << std::fixed << std::setprecision(3) << secs << " s";
  if (secs > 0) std::cout << " (" << std::setprecision(0) << static_cast<double>(n) / secs << " records/s)";
  std::cout << "\nsnapshot " << snapshot_path << '\n';
  return kOk;
}

auto catalog_for(const os::Snapshot<>& snap) -> os::SchemaConfig {
  if (snap.catalog) return *snap.catalog;
  std::vector<os::AttributeConfig> attrs;
  const auto& schema = snap.sketch.schema();
  for (std::size_t i = 0; i < schema.attribute_count(); ++i) {
    attrs.push_back({"a" + std::to_string(i + 1), os::AttributeKind::numeric, schema.attributes[i].domain_bits});
  }
  return os::SchemaConfig(std::move(attrs));
}

auto cmd_query(const std::string& snapshot_path, const std::vector<std::string>& queries, bool as_json) -> int {
  std::ifstream in(snapshot_path, std::ios::binary);
  if (!in) throw os::Error(os::Errc::snapshot_error, "cannot open '" + snapshot_path + "'");
  const auto snap = os::load_snapshot(in);
  const auto catalog = catalog_for(snap);
  for (const auto& text : queries) {
    const auto q = os::parse_query(text, catalog);
    const auto e = snap.sketch.estimate(q);
    if (as_json) {
      auto j = estimate_json(e);
      j["query"] = os::format_query(q, catalog);
      std::cout << j.dump() << '\n';
      continue;
    }
    std::cout << "query: " << os::format_query(q, catalog) << '\n'
              << "value: " << e.value << '\n'
              << "intersection_size: " << e.intersection_size << '\n'
              << "n_max: " << e.n_max << '\n'
              << "below_sanity: " << (e.below_sanity ? "true" : "false") << '\n'
              << "sanity_threshold: " << e.sanity_threshold << '\n'
              << "fallback_value: " << e.fallback_value << '\n';
  }
  return kOk;
}

struct BenchFlags {
  std::string stream_spec;
  std::string input;
  std::string estimators = "s0min,s0cap,s1";
  std::string out;
  std::string per_query;
  double sample_rate = 0.0005;
  std::size_t per_record = 10;
  std::size_t p_min = 2;
  std::size_t p_max = 0;
  std::optional<std::uint64_t> query_seed;
  bool timing = false;
  bool no_oracle = false;
};

auto cmd_bench(const Common& c, const BenchFlags& f) -> int {
  std::vector<os::Record> stream;
  os::Schema schema;
  std::uint64_t seed = 0;
  if (!f.stream_spec.empty()) {
    if (!f.input.empty()) throw os::Error(os::Errc::parse_error, "give either --stream-spec or --input");
    auto spec = os::parse_stream_spec(f.stream_spec);
    seed = resolve_seed(c, nullptr);
    stream = os::generate_stream(spec);
    schema = os::Schema::point_only(spec.attribute_count);
  } else if (!f.input.empty()) {
    auto cfg = load_schema(c);
    seed = resolve_seed(c, &cfg);
    std::ifstream in(f.input);
    if (!in) throw std::runtime_error("cannot open '" + f.input + "'");
    os::read_records_csv(in, cfg, [&](os::Record&& r) { stream.push_back(std::move(r)); });
    schema = cfg.schema();
  } else {
    throw os::Error(os::Errc::parse_error, "one of --stream-spec or --input is required");
  }

  // s0min and s0cap share one rid-list sketch
  std::vector<os::EstimatorHandle> chosen;
  std::vector<os::EstimatorHandle> s0_pair;
  for (auto name : os::detail::split(f.estimators, ',')) {
    name = os::detail::trim(name);
    if (name == "s0min" || name == "s0cap") {
      if (s0_pair.empty()) s0_pair = os::make_s0_estimators(stream, schema.attribute_count(), c.epsilon, c.delta, seed);
      chosen.push_back(s0_pair[name == "s0min" ? 0 : 1]);
    } else if (name == "s1" || name.rfind("s1:", 0) == 0) {
      Common s1 = c;
      if (name.size() > 3) s1.memory = std::string(name.substr(3));
      const auto p = make_params(s1, schema.grid_count(), seed);
      chosen.push_back(os::make_s1_estimator(stream, p, schema, std::string(name)));
    } else {
      throw os::Error(os::Errc::parse_error, "unknown estimator '" + std::string(name) + "'");
    }
  }

  os::QueryGenOptions gen;
  gen.sample_rate = f.sample_rate;
  gen.per_record_per_p = f.per_record;
  gen.p_min = f.p_min;
  gen.p_max = f.p_max;
  gen.seed = f.query_seed.value_or(seed);
  const auto workload = stream.empty() ? os::QueryWorkload{} : os::generate_queries(stream, gen);

  std::optional<os::RecordStore> oracle;
  if (!f.no_oracle) oracle.emplace(stream);
  const auto report = os::run_benchmark(stream, workload, chosen, oracle ? &*oracle : nullptr);
  const bool timing = f.timing || f.no_oracle;

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!f.out.empty()) {
    file.open(f.out);
    if (!file) throw std::runtime_error("cannot write '" + f.out + "'");
    out = &file;
  }
  os::write_report_csv(*out, report, timing);
  if (!f.per_query.empty()) {
    std::ofstream rows(f.per_query);
    if (!rows) throw std::runtime_error("cannot write '" + f.per_query + "'");
    os::write_query_rows_csv(rows, report, timing);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-predicate stream sketches"};
  app.require_subcommand(1);
  Common common;

  bool configure_json = false;
  auto* configure = app.add_subcommand("configure", "Solve for sketch parameters under a memory budget");
  add_sketch_flags(configure, common);
  add_schema_flags(configure, common);
  configure->add_flag("--json", configure_json, "Print parameters as JSON");

  std::string input = "-";
  std::string snapshot;
  auto* ingest = app.add_subcommand("ingest", "Build a sketch from a CSV stream and write a snapshot");
  add_sketch_flags(ingest, common);
  add_schema_flags(ingest, common);
  ingest->add_option("--input,input", input, "Record CSV ('-' for stdin)");
  ingest->add_option("--snapshot,--out", snapshot, "Snapshot file to write")->required();

  std::vector<std::string> queries;
  bool query_json = false;
  auto* query = app.add_subcommand("query", "Estimate queries against a snapshot");
  query->add_option("--snapshot", snapshot, "Snapshot file")->required();
  query->add_option("query", queries, "Query, e.g. \"a3=17 AND a1 IN [4,99]\"")->required();
  query->add_flag("--json", query_json, "Print estimates as JSON lines");

  BenchFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "Run a query workload against one or more estimators");
  add_sketch_flags(bench, common);
  add_schema_flags(bench, common);
  bench->add_option("--stream-spec", bench_flags.stream_spec, "e.g. n=100000,attrs=5,dist=zipf:1.1,domain=1024,seed=7");
  bench->add_option("--input", bench_flags.input, "Record CSV instead of a generated stream");
  bench->add_option("--estimators", bench_flags.estimators, "Comma list of s0min, s0cap, s1, s1:<memory>")
      ->capture_default_str();
  bench->add_option("--out", bench_flags.out, "Report CSV (stdout when omitted)");
  bench->add_option("--per-query", bench_flags.per_query, "Also write per-query estimates to this CSV");
  bench->add_option("--sample-rate", bench_flags.sample_rate, "Fraction of records used to seed queries")
      ->capture_default_str();
  bench->add_option("--per-record", bench_flags.per_record, "Queries per sampled record and predicate count")
      ->capture_default_str();
  bench->add_option("--p-min", bench_flags.p_min, "Smallest predicate count")->capture_default_str();
  bench->add_option("--p-max", bench_flags.p_max, "Largest predicate count (0: all attributes)");
  bench->add_option("--query-seed", bench_flags.query_seed, "Seed for query generation (default: master seed)");
  bench->add_flag("--timing", bench_flags.timing, "Add latency and throughput columns");
  bench->add_flag("--no-oracle", bench_flags.no_oracle, "Skip exact counting; error columns are omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (configure->parsed()) return cmd_configure(common, configure_json);
    if (ingest->parsed()) return cmd_ingest(common, input, snapshot);
    if (query->parsed()) return cmd_query(snapshot, queries, query_json);
    if (bench->parsed()) return cmd_bench(common, bench_flags);
  } catch (const os::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
