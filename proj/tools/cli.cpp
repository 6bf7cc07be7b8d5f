#include "cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "report.hpp"
#include "treerecon/bounds.hpp"
#include "treerecon/channel.hpp"
#include "treerecon/error.hpp"
#include "treerecon/oracle.hpp"
#include "treerecon/tree.hpp"
#include "treerecon/variational.hpp"

namespace treerecon::cli {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Format { Json, Csv, Table };

const std::vector<double> kTable1Delta2 = {0.1, 0.2, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

// ---- shared helpers ----

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::BadInput, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool looks_like_json(const std::string& text) {
  const auto pos = text.find_first_not_of(" \t\r\n");
  return pos != std::string::npos && text[pos] == '{';
}

json parse_json(const std::string& text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::BadInput, std::string(what) + ": " + e.what());
  }
}

double to_number(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw Error(ErrorCode::BadInput, "not a number: '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::BadInput, "not an unsigned integer: '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw Error(ErrorCode::BadInput, "not a boolean: '" + s + "'");
}

std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

void expect_header(const Table& t, const std::vector<std::string>& header, std::string_view command) {
  if (t.header != header) {
    throw Error(ErrorCode::BadInput, "CSV header does not match the " + std::string(command) + " schema");
  }
}

// ---- option groups ----

struct ChannelArgs {
  std::string channel, family;
  int q = 0;
  double beta = 0.0, delta1 = 0.0, delta2 = 0.0;
  CLI::Option *channel_opt = nullptr, *family_opt = nullptr, *q_opt = nullptr, *beta_opt = nullptr,
              *delta1_opt = nullptr, *delta2_opt = nullptr;

  void add(CLI::App* app) {
    channel_opt = app->add_option("--channel", channel, "channel JSON, inline or a file path");
    family_opt = app->add_option("--family", family, "parametric family")
                     ->check(CLI::IsMember({"potts", "binary"}));
    q_opt = app->add_option("--q", q, "Potts: number of states");
    beta_opt = app->add_option("--beta", beta, "Potts: inverse temperature");
    delta1_opt = app->add_option("--delta1", delta1, "binary: P(1 -> 2)");
    delta2_opt = app->add_option("--delta2", delta2, "binary: P(2 -> 2)");
  }

  // The same fields are registered on several subcommands; point at the
  // options of the one that was parsed.
  void bind(CLI::App* app) {
    channel_opt = app->get_option_no_throw("--channel");
    family_opt = app->get_option_no_throw("--family");
    q_opt = app->get_option_no_throw("--q");
    beta_opt = app->get_option_no_throw("--beta");
    delta1_opt = app->get_option_no_throw("--delta1");
    delta2_opt = app->get_option_no_throw("--delta2");
  }

  bool given() const { return channel_opt->count() > 0 || family_opt->count() > 0; }
};

struct ResolvedChannel {
  Channel channel;
  json spec;
  std::string description;
};

std::string describe(const json& spec, const Channel& ch) {
  if (spec.contains("family")) {
    const auto family = spec.at("family").get<std::string>();
    if (family == "potts") {
      return "potts(q=" + std::to_string(ch.q()) + ",beta=" + general(spec.at("beta").get<double>()) + ")";
    }
    if (family == "binary") {
      return describe_binary(spec.at("delta1").get<double>(), spec.at("delta2").get<double>());
    }
  }
  return "matrix(q=" + std::to_string(ch.q()) + ")";
}

ResolvedChannel resolve_channel(const ChannelArgs& a) {
  json spec;
  if (a.channel_opt->count() > 0) {
    if (a.family_opt->count() > 0) throw UsageError("--channel and --family are mutually exclusive");
    const std::string text = looks_like_json(a.channel) ? a.channel : read_file(a.channel);
    spec = parse_json(text, "channel JSON");
  } else if (a.family_opt->count() > 0) {
    if (a.family == "potts") {
      if (a.q_opt->count() == 0 || a.beta_opt->count() == 0) throw UsageError("--family potts needs --q and --beta");
      spec = {{"family", "potts"}, {"q", a.q}, {"beta", a.beta}};
    } else {
      if (a.delta1_opt->count() == 0 || a.delta2_opt->count() == 0) {
        throw UsageError("--family binary needs --delta1 and --delta2");
      }
      spec = {{"family", "binary"}, {"delta1", a.delta1}, {"delta2", a.delta2}};
    }
  } else {
    throw UsageError("a channel is required: --channel or --family");
  }
  Channel ch = channel_from_json(spec);
  return {ch, spec, describe(spec, ch)};
}

struct OptimizerArgs {
  OptimizerSettings s;

  void add(CLI::App* app) {
    app->add_option("--starts", s.starts, "multi-start count (q >= 3)")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--max-iters", s.max_iters, "iteration budget per local search")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--tol", s.tol, "objective tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  }
};

struct CommonArgs {
  std::string format;
  std::string from_file;
  int threads = -1;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--format", format, "json, csv or table")->check(CLI::IsMember({"json", "csv", "table"}));
    app->add_option("--from-file", from_file, "re-emit a saved report (JSON or CSV) instead of computing");
    app->add_option("--threads", threads, "worker threads, 0 = all cores (env TREE_RECON_THREADS)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--seed", seed, "master seed")->capture_default_str();
  }

  unsigned thread_count() const {
    if (threads >= 0) return static_cast<unsigned>(threads);
    const char* env = std::getenv("TREE_RECON_THREADS");
    if (env == nullptr || *env == '\0') return 0;
    unsigned v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw UsageError("TREE_RECON_THREADS must be a non-negative integer");
    }
    return v;
  }

  Format output(bool tty, bool json_default) const {
    if (format == "json") return Format::Json;
    if (format == "csv") return Format::Csv;
    if (format == "table") return Format::Table;
    if (json_default) return Format::Json;
    return tty ? Format::Table : Format::Csv;
  }
};

// A subcommand's report: a JSON document with a flat tabular view.
struct ReportKind {
  std::string name;
  std::function<Table(const json&)> tabulate;
  std::function<json(const Table&)> from_csv;
};

json load_report(const ReportKind& kind, const std::string& path) {
  const std::string text = read_file(path);
  json r;
  if (looks_like_json(text)) {
    r = parse_json(text, "report");
    if (!r.is_object() || r.value("command", std::string()) != kind.name) {
      throw Error(ErrorCode::BadInput, "'" + path + "' is not a " + kind.name + " report");
    }
  } else {
    r = kind.from_csv(parse_csv(text));
  }
  try {
    (void)kind.tabulate(r);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadInput, "report does not match the " + kind.name + " schema: " + e.what());
  }
  return r;
}

void emit(std::ostream& out, Format f, const ReportKind& kind, const json& report) {
  switch (f) {
    case Format::Json:
      out << report.dump(2) << '\n';
      break;
    case Format::Csv:
      out << to_csv(kind.tabulate(report));
      break;
    case Format::Table:
      out << to_text(kind.tabulate(report));
      break;
  }
}

// ---- c-of-m ----

Table c_of_m_table(const json& r) {
  std::string argmax;
  for (const auto& x : r.at("argmax")) {
    if (!argmax.empty()) argmax += ' ';
    argmax += fixed(x.get<double>(), 6);
  }
  return {{"channel", "value", "near_center_limit", "near_center_is_max", "seed", "argmax"},
          {{r.at("channel").get<std::string>(), fixed(r.at("value").get<double>(), 6),
            fixed(r.at("near_center_limit").get<double>(), 6),
            r.at("near_center_is_max").get<bool>() ? "true" : "false",
            std::to_string(r.at("seed").get<std::uint64_t>()), argmax}}};
}

json c_of_m_from_csv(const Table& t) {
  expect_header(t, {"channel", "value", "near_center_limit", "near_center_is_max", "seed", "argmax"}, "c-of-m");
  if (t.rows.size() != 1) throw Error(ErrorCode::BadInput, "c-of-m CSV must have exactly one row");
  const auto& row = t.rows[0];
  json argmax = json::array();
  std::istringstream ss(row[5]);
  for (std::string x; ss >> x;) argmax.push_back(to_number(x));
  return {{"command", "c-of-m"},         {"channel", row[0]},
          {"value", to_number(row[1])},  {"near_center_limit", to_number(row[2])},
          {"near_center_is_max", to_bool(row[3])}, {"seed", to_u64(row[4])},
          {"argmax", argmax}};
}

json c_of_m_report(const ResolvedChannel& rc, OptimizerSettings s) {
  const auto res = compute_c(rc.channel, s);
  json argmax = json::array();
  for (double x : res.argmax.values()) argmax.push_back(rounded(x, 6));
  return {{"command", "c-of-m"},
          {"channel", rc.description},
          {"channel_spec", rc.spec},
          {"value", rounded(res.value, 6)},
          {"argmax", argmax},
          {"near_center_limit", rounded(res.trace.near_center_limit, 6)},
          {"near_center_is_max", res.trace.near_center_is_max},
          {"starts", res.trace.starts},
          {"converged_starts", res.trace.converged_starts},
          {"seed", s.seed}};
}

// ---- bounds ----

const std::vector<std::string> kBoundsHeader = {"channel", "branching", "criterion", "constant",
                                                "product", "verdict", "seed"};

Table bounds_table(const json& r) {
  Table t{kBoundsHeader, {}};
  const double d = r.at("branching").get<double>();
  for (const auto& c : r.at("criteria")) {
    t.rows.push_back({r.at("channel").get<std::string>(), general(d), c.at("criterion").get<std::string>(),
                      fixed(c.at("constant").get<double>(), 6), fixed(c.at("product").get<double>(), 6),
                      c.at("verdict").get<std::string>(), std::to_string(r.at("seed").get<std::uint64_t>())});
  }
  return t;
}

json bounds_from_csv(const Table& t) {
  expect_header(t, kBoundsHeader, "bounds");
  if (t.rows.empty()) throw Error(ErrorCode::BadInput, "bounds CSV has no rows");
  json criteria = json::array();
  for (const auto& row : t.rows) {
    if (row[0] != t.rows[0][0] || row[1] != t.rows[0][1] || row[6] != t.rows[0][6]) {
      throw Error(ErrorCode::BadInput, "bounds CSV rows describe different runs");
    }
    (void)verdict_from_string(row[5]);
    criteria.push_back({{"criterion", row[2]},
                        {"constant", to_number(row[3])},
                        {"product", to_number(row[4])},
                        {"verdict", row[5]}});
  }
  return {{"command", "bounds"},
          {"channel", t.rows[0][0]},
          {"branching", to_number(t.rows[0][1])},
          {"seed", to_u64(t.rows[0][6])},
          {"criteria", criteria}};
}

json criterion_json(std::string_view name, double constant, double d, Verdict v) {
  return {{"criterion", name},
          {"constant", rounded(constant, 6)},
          {"product", rounded(d * constant, 6)},
          {"verdict", to_string(v)}};
}

json bounds_report(const ResolvedChannel& rc, double d, const OptimizerSettings& s) {
  const auto b = bound_report(rc.channel, d, s, rc.description);
  json criteria = json::array({criterion_json("fk", b.fk, d, b.verdicts.fk), criterion_json("ks", b.ks, d, b.verdicts.ks)});
  if (b.martin) criteria.push_back(criterion_json("martin", *b.martin, d, *b.verdicts.martin));
  if (b.mp) criteria.push_back(criterion_json("mp", *b.mp, d, *b.verdicts.mp));
  return {{"command", "bounds"},         {"channel", rc.description},
          {"q", rc.channel.q()},         {"branching", d},
          {"fk_near_center", b.fk_near_center}, {"criteria", criteria},
          {"seed", s.seed}};
}

// ---- table1 ----

const std::vector<std::string> kTable1Header = {"delta2", "ks", "fk", "martin", "mp"};

Table table1_table(const json& r) {
  Table t{kTable1Header, {}};
  for (const auto& row : r.at("rows")) {
    t.rows.push_back({general(row.at("delta2").get<double>()), fixed(row.at("ks").get<double>(), 4),
                      fixed(row.at("fk").get<double>(), 4), fixed(row.at("martin").get<double>(), 4),
                      fixed(row.at("mp").get<double>(), 4)});
  }
  return t;
}

json table1_from_csv(const Table& t) {
  expect_header(t, kTable1Header, "table1");
  json rows = json::array();
  for (const auto& row : t.rows) {
    json j;
    for (std::size_t k = 0; k < kTable1Header.size(); ++k) j[kTable1Header[k]] = to_number(row[k]);
    rows.push_back(j);
  }
  return {{"command", "table1"}, {"rows", rows}};
}

json table1_report(double delta1, const std::vector<double>& delta2, double d, const OptimizerSettings& s) {
  json rows = json::array();
  const auto reports = table1(delta1, delta2, d, s);
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& b = reports[k];
    rows.push_back({{"delta2", delta2[k]},
                    {"ks", rounded(b.ks, 4)},
                    {"fk", rounded(b.fk, 4)},
                    {"martin", rounded(*b.martin, 4)},
                    {"mp", rounded(*b.mp, 4)},
                    {"verdicts",
                     {{"fk", to_string(b.verdicts.fk)},
                      {"ks", to_string(b.verdicts.ks)},
                      {"martin", to_string(*b.verdicts.martin)},
                      {"mp", to_string(*b.verdicts.mp)}}}});
  }
  return {{"command", "table1"}, {"delta1", delta1}, {"branching", d}, {"rows", rows}, {"seed", s.seed}};
}

// ---- verify ----

const std::vector<std::string> kVerifyHeader = {"check", "statistic", "value", "tolerance", "pass", "seed"};
const std::vector<std::string> kSuites = {"lemma1", "recursion", "propagation", "lyapunov", "bayes", "all"};

Table verify_table(const json& r) {
  Table t{kVerifyHeader, {}};
  const auto seed = std::to_string(r.at("seed").get<std::uint64_t>());
  for (const auto& c : r.at("checks")) {
    const auto& v = c.at("value");
    t.rows.push_back({c.at("check").get<std::string>(), c.at("statistic").get<std::string>(),
                      v.is_null() ? "none" : sci(v.get<double>()), general(c.at("tolerance").get<double>()),
                      c.at("pass").get<bool>() ? "true" : "false", seed});
  }
  (void)r.at("pass").get<bool>();
  return t;
}

json verify_from_csv(const Table& t) {
  expect_header(t, kVerifyHeader, "verify");
  if (t.rows.empty()) throw Error(ErrorCode::BadInput, "verify CSV has no rows");
  json checks = json::array();
  bool pass = true;
  for (const auto& row : t.rows) {
    if (row[5] != t.rows[0][5]) throw Error(ErrorCode::BadInput, "verify CSV rows carry different seeds");
    const bool ok = to_bool(row[4]);
    pass = pass && ok;
    checks.push_back({{"check", row[0]},
                      {"statistic", row[1]},
                      {"value", row[2] == "none" ? json(nullptr) : json(to_number(row[2]))},
                      {"tolerance", to_number(row[3])},
                      {"pass", ok}});
  }
  return {{"command", "verify"}, {"seed", to_u64(t.rows[0][5])}, {"checks", checks}, {"pass", pass}};
}

json verify_report(const std::string& suite, const std::vector<InstanceReport>& reports, bool random_suite,
                   std::uint64_t seed) {
  const SuiteTolerances tol;
  const auto s = summarize(reports, tol);
  json checks = json::array();
  auto wants = [&](std::string_view name) { return suite == "all" || suite == name; };
  auto add = [&](std::string_view check, std::string_view stat, json value, double tolerance, bool pass) {
    checks.push_back(
        {{"check", check}, {"statistic", stat}, {"value", value}, {"tolerance", tolerance}, {"pass", pass}});
  };
  if (wants("propagation")) add("propagation", "max_abs_diff", s.max_propagation, tol.propagation, s.pass_propagation);
  if (wants("lemma1")) add("lemma1", "max_abs_diff", s.max_lemma1, tol.lemma1, s.pass_lemma1);
  if (wants("recursion")) {
    add("recursion", "max_abs_diff", s.max_recursion, tol.recursion, s.pass_recursion);
    if (random_suite) add("pointwise_witness", "max_pointwise_gap", s.max_pointwise_gap, tol.witness, s.pass_witness);
  }
  if (wants("bayes")) add("bayes", "max_abs_diff", s.max_bayes, tol.bayes, s.pass_bayes);
  if (wants("lyapunov")) {
    const bool any = s.min_lyapunov_margin != std::numeric_limits<double>::infinity();
    add("lyapunov", "min_margin", any ? json(s.min_lyapunov_margin) : json(nullptr), tol.lyapunov, s.pass_lyapunov);
  }
  bool pass = true;
  for (const auto& c : checks) pass = pass && c.at("pass").get<bool>();
  return {{"command", "verify"},
          {"suite", suite},
          {"source", random_suite ? "random" : "instance"},
          {"instances", s.instances},
          {"node_checks", s.node_checks},
          {"checks", checks},
          {"pass", pass},
          {"seed", seed}};
}

// ---- simulate ----

const std::vector<std::string> kSimulateHeader = {"depth", "mean_L", "stderr", "samples", "seed"};

Table simulate_table(const json& r) {
  Table t{kSimulateHeader, {}};
  const auto seed = std::to_string(r.at("seed").get<std::uint64_t>());
  for (const auto& e : r.at("results")) {
    t.rows.push_back({std::to_string(e.at("depth").get<std::size_t>()), general(e.at("mean_L").get<double>()),
                      general(e.at("stderr").get<double>()), std::to_string(e.at("samples").get<std::size_t>()),
                      seed});
  }
  return t;
}

json simulate_from_csv(const Table& t) {
  expect_header(t, kSimulateHeader, "simulate");
  if (t.rows.empty()) throw Error(ErrorCode::BadInput, "simulate CSV has no rows");
  json results = json::array();
  for (const auto& row : t.rows) {
    if (row[4] != t.rows[0][4]) throw Error(ErrorCode::BadInput, "simulate CSV rows carry different seeds");
    results.push_back({{"depth", to_u64(row[0])},
                       {"mean_L", to_number(row[1])},
                       {"stderr", to_number(row[2])},
                       {"samples", to_u64(row[3])}});
  }
  return {{"command", "simulate"}, {"seed", to_u64(t.rows[0][4])}, {"results", results}};
}

std::pair<std::size_t, std::size_t> parse_sweep(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) throw UsageError("--depth-sweep expects a..b");
  std::size_t a = 0, b = 0;
  try {
    a = static_cast<std::size_t>(to_u64(s.substr(0, dots)));
    b = static_cast<std::size_t>(to_u64(s.substr(dots + 2)));
  } catch (const Error&) {
    throw UsageError("--depth-sweep expects a..b with integers a <= b");
  }
  if (a < 1 || a > b) throw UsageError("--depth-sweep expects 1 <= a <= b");
  return {a, b};
}

// ---- driver ----

struct Parsed {
  CLI::App* sub = nullptr;
  CommonArgs common;
  ChannelArgs channel;
  OptimizerArgs optimizer;
  double d = 1.0;
  CLI::Option* d_opt = nullptr;
  double t1_delta1 = 0.3;
  std::vector<double> t1_delta2 = kTable1Delta2;
  std::string tree = "regular:d=2";
  std::size_t depth = 0;
  CLI::Option* depth_opt = nullptr;
  std::string sweep;
  std::size_t samples = 10000;
  std::string mode = "annealed";
  std::string suite = "all";
  std::size_t instances = 50;
  std::size_t max_leaves = 6;
};

int execute(const std::string& name, Parsed& p, std::ostream& out, bool tty) {
  const CommonArgs& c = p.common;
  const unsigned threads = c.thread_count();
  OptimizerSettings settings = p.optimizer.s;
  settings.seed = c.seed;
  settings.threads = threads;

  if (name == "c-of-m") {
    const ReportKind kind{name, c_of_m_table, c_of_m_from_csv};
    const json r = c.from_file.empty() ? c_of_m_report(resolve_channel(p.channel), settings) : load_report(kind, c.from_file);
    emit(out, c.output(tty, false), kind, r);
    return kOk;
  }
  if (name == "bounds") {
    const ReportKind kind{name, bounds_table, bounds_from_csv};
    json r;
    if (c.from_file.empty()) {
      if (p.d_opt->count() == 0) throw UsageError("bounds needs --d");
      r = bounds_report(resolve_channel(p.channel), p.d, settings);
    } else {
      r = load_report(kind, c.from_file);
    }
    emit(out, c.output(tty, false), kind, r);
    return kOk;
  }
  if (name == "table1") {
    const ReportKind kind{name, table1_table, table1_from_csv};
    const json r = c.from_file.empty() ? table1_report(p.t1_delta1, p.t1_delta2, p.d, settings)
                                       : load_report(kind, c.from_file);
    emit(out, c.output(tty, false), kind, r);
    return kOk;
  }
  if (name == "verify") {
    const ReportKind kind{name, verify_table, verify_from_csv};
    json r;
    if (!c.from_file.empty()) {
      r = load_report(kind, c.from_file);
    } else if (p.channel.given()) {
      const auto rc = resolve_channel(p.channel);
      const auto spec = parse_tree_spec(p.tree, p.depth_opt->count() ? p.depth : 2);
      spec.validate();
      const auto tree = sample_tree(spec, c.seed);
      const bool need_c = p.suite == "all" || p.suite == "lyapunov";
      const double cm = need_c ? compute_c(rc.channel, settings).value : 0.0;
      r = verify_report(p.suite, {check_instance(0, rc.channel, spec, tree, cm, {})}, false, c.seed);
      r["channel"] = rc.description;
      r["tree"] = spec.to_string();
      r["depth"] = spec.depth;
    } else {
      SuiteOptions opt;
      opt.instances = p.instances;
      opt.max_leaves = p.max_leaves;
      opt.seed = c.seed;
      opt.threads = threads;
      r = verify_report(p.suite, run_random_suite(opt), true, c.seed);
    }
    emit(out, c.output(tty, true), kind, r);
    return r.at("pass").get<bool>() ? kOk : kCheckFailed;
  }
  if (name == "simulate") {
    const ReportKind kind{name, simulate_table, simulate_from_csv};
    json r;
    if (!c.from_file.empty()) {
      r = load_report(kind, c.from_file);
    } else {
      const auto rc = resolve_channel(p.channel);
      if (!p.sweep.empty() && p.depth_opt->count()) throw UsageError("--depth and --depth-sweep are exclusive");
      auto [lo, hi] = p.sweep.empty() ? std::pair{p.depth_opt->count() ? p.depth : 8, p.depth_opt->count() ? p.depth : 8}
                                      : parse_sweep(p.sweep);
      auto spec = parse_tree_spec(p.tree, lo);
      MonteCarloOptions opt;
      opt.samples = p.samples;
      opt.seed = c.seed;
      opt.mode = parse_average_mode(p.mode);
      opt.threads = threads;
      json results = json::array();
      for (std::size_t n = lo; n <= hi; ++n) {
        spec.depth = n;
        const auto est = mc_root_entropy(spec, rc.channel, opt);
        results.push_back(
            {{"depth", est.depth}, {"mean_L", est.mean}, {"stderr", est.std_error}, {"samples", est.samples}});
      }
      r = {{"command", "simulate"}, {"channel", rc.description}, {"tree", spec.to_string()},
           {"mode", p.mode},        {"samples", p.samples},     {"seed", c.seed},
           {"results", results}};
    }
    emit(out, c.output(tty, true), kind, r);
    return kOk;
  }
  throw UsageError("unknown subcommand " + name);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool tty) {
  CLI::App app{"Reconstruction bounds for broadcasting on trees", "treerecon"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 ok, 1 verification failed, 2 invalid input, 3 no convergence, 64 usage.");
  Parsed p;

  auto* c_of_m = app.add_subcommand("c-of-m", "variational constant c(M) of a channel");
  auto* bounds = app.add_subcommand("bounds", "all criteria for a channel at branching number d");
  auto* t1 = app.add_subcommand("table1", "bound table for binary channels [[1-d1,d1],[1-d2,d2]]");
  auto* verify = app.add_subcommand("verify", "exact enumeration checks on small trees");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo root entropy on sampled trees");

  for (auto* sub : {c_of_m, bounds, t1, verify, simulate}) {
    p.common.add(sub);
  }
  for (auto* sub : {c_of_m, bounds, verify, simulate}) p.channel.add(sub);
  for (auto* sub : {c_of_m, bounds, t1, verify}) p.optimizer.add(sub);

  p.d_opt = bounds->add_option("--d", p.d, "branching number (mean offspring)");
  t1->add_option("--d", p.d, "branching number for the verdicts")->capture_default_str();
  t1->add_option("--delta1", p.t1_delta1, "row-1 flip probability")->capture_default_str();
  t1->add_option("--delta2", p.t1_delta2, "row-2 values")->delimiter(',');

  for (auto* sub : {verify, simulate}) {
    sub->add_option("--tree", p.tree, "regular:d=K or gw:k=p,...")->capture_default_str();
  }
  p.depth_opt = verify->add_option("--depth", p.depth, "tree depth N (default 2)");
  simulate->add_option("--depth", p.depth, "tree depth N (default 8)");
  simulate->add_option("--depth-sweep", p.sweep, "depths a..b");
  simulate->add_option("--samples", p.samples, "Monte Carlo samples per depth")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--mode", p.mode, "Galton-Watson average")
      ->capture_default_str()
      ->check(CLI::IsMember({"annealed", "quenched"}));
  verify->add_option("--suite", p.suite, "which identities to check")
      ->capture_default_str()
      ->check(CLI::IsMember(kSuites));
  verify->add_option("--instances", p.instances, "random suite size")->capture_default_str()->check(CLI::PositiveNumber);
  verify->add_option("--max-leaves", p.max_leaves, "random suite leaf cap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  std::vector<std::string> argv_store{"treerecon"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub != t1) p.channel.bind(sub);
  if (sub == simulate) p.depth_opt = simulate->get_option("--depth");

  try {
    return execute(sub->get_name(), p, out, tty);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_validation(e.code()) ? kValidation : kNoConvergence;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
}

}  // namespace treerecon::cli
