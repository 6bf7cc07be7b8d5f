#include "treerecon/tree.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "treerecon/entropy.hpp"
#include "treerecon/error.hpp"
#include "treerecon/parallel.hpp"
#include "treerecon/rng.hpp"

namespace treerecon {

namespace {

constexpr std::uint64_t kTreeStream = 0x54524545ULL;       // "TREE"
constexpr std::uint64_t kBroadcastStream = 0x42524f41ULL;  // "BROA"
constexpr std::size_t kSampleBlock = 256;

std::size_t draw_index(std::span<const double> cumulative, double u) {
  for (std::size_t k = 0; k + 1 < cumulative.size(); ++k) {
    if (u < cumulative[k]) return k;
  }
  return cumulative.size() - 1;
}

std::vector<double> cumulative_of(std::span<const double> p) {
  std::vector<double> c(p.size());
  std::partial_sum(p.begin(), p.end(), c.begin());
  return c;
}

double parse_double(std::string_view s, std::string_view what) {
  // std::from_chars for double is not in libstdc++ 11 for all targets; strtod is.
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw Error(ErrorCode::BadTreeSpec, "cannot parse " + std::string(what) + " '" + tmp + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view s, std::string_view what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::BadTreeSpec, "cannot parse " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

// Per-channel tables reused across the recursion.
struct RecursionTables {
  std::size_t q;
  std::vector<double> log_alpha;
  std::vector<double> m_over_alpha;      // M(j, i) / alpha(i), row-major
  std::vector<double> log_m_over_alpha;  // its log, for point-mass children

  explicit RecursionTables(const Channel& ch) : q(ch.q()), log_alpha(q), m_over_alpha(q * q), log_m_over_alpha(q * q) {
    const auto& a = ch.stationary();
    for (std::size_t j = 0; j < q; ++j) {
      log_alpha[j] = std::log(a[j]);
      for (std::size_t i = 0; i < q; ++i) {
        m_over_alpha[j * q + i] = ch(j, i) / a[i];
        log_m_over_alpha[j * q + i] = std::log(m_over_alpha[j * q + i]);
      }
    }
  }
};

// Fills beliefs[v] for every non-leaf v from the rows of its children.
// `leaf_spin` is non-null when leaves are point masses (fast path).
void recurse_up(const SampledTree& tree, const RecursionTables& tab, std::vector<double>& beliefs,
                const std::uint32_t* leaf_spin, std::vector<double>& scratch) {
  const std::size_t q = tab.q;
  scratch.resize(q);
  for (std::size_t idx = tree.size(); idx-- > 0;) {
    const NodeId v = idx;
    if (tree.is_leaf(v)) continue;
    double* logs = scratch.data();
    std::copy(tab.log_alpha.begin(), tab.log_alpha.end(), logs);
    const NodeId first = tree.first_child(v);
    const NodeId last = first + tree.child_count(v);
    for (NodeId w = first; w < last; ++w) {
      if (leaf_spin != nullptr && tree.is_leaf(w)) {
        const std::uint32_t s = leaf_spin[w];
        for (std::size_t j = 0; j < q; ++j) logs[j] += tab.log_m_over_alpha[j * q + s];
        continue;
      }
      const double* pw = beliefs.data() + w * q;
      for (std::size_t j = 0; j < q; ++j) {
        const double* row = tab.m_over_alpha.data() + j * q;
        double msg = 0.0;
        for (std::size_t i = 0; i < q; ++i) msg += row[i] * pw[i];
        logs[j] += std::log(msg);
      }
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < q; ++j) mx = std::max(mx, logs[j]);
    if (!std::isfinite(mx)) {
      throw Error(ErrorCode::NumericalUnderflow, "belief recursion produced non-finite logs");
    }
    double* out = beliefs.data() + v * q;
    double total = 0.0;
    for (std::size_t j = 0; j < q; ++j) {
      out[j] = std::exp(logs[j] - mx);
      total += out[j];
    }
    for (std::size_t j = 0; j < q; ++j) out[j] /= total;
  }
}

}  // namespace

// ---- TreeSpec ----

TreeSpec TreeSpec::regular(std::size_t d, std::size_t depth) {
  TreeSpec s;
  s.kind = Kind::Regular;
  s.d = d;
  s.depth = depth;
  s.validate();
  return s;
}

TreeSpec TreeSpec::galton_watson(std::vector<double> pmf, std::size_t depth) {
  TreeSpec s;
  s.kind = Kind::GaltonWatson;
  s.pmf = std::move(pmf);
  s.depth = depth;
  s.validate();
  return s;
}

void TreeSpec::validate() const {
  if (depth < 1) throw Error(ErrorCode::BadTreeSpec, "depth must be >= 1");
  if (kind == Kind::Regular) {
    if (d < 1) throw Error(ErrorCode::BadTreeSpec, "regular tree needs d >= 1");
    return;
  }
  if (pmf.size() < 2) throw Error(ErrorCode::BadTreeSpec, "offspring pmf has no mass above 0");
  double total = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::BadTreeSpec, "offspring pmf entries must be finite and >= 0");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::BadTreeSpec, "offspring pmf must sum to 1");
  }
  if (pmf[0] > 0.0) {
    throw Error(ErrorCode::BadTreeSpec, "offspring pmf puts mass on 0 children");
  }
}

double TreeSpec::mean_offspring() const {
  if (kind == Kind::Regular) return static_cast<double>(d);
  double m = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
  return m;
}

std::string TreeSpec::to_string() const {
  std::ostringstream os;
  if (kind == Kind::Regular) {
    os << "regular:d=" << d;
    return os.str();
  }
  os.precision(17);
  os << "gw:";
  bool first = true;
  for (std::size_t k = 1; k < pmf.size(); ++k) {
    if (pmf[k] == 0.0) continue;
    if (!first) os << ',';
    os << k << '=' << pmf[k];
    first = false;
  }
  return os.str();
}

TreeSpec parse_tree_spec(std::string_view text, std::size_t depth) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::BadTreeSpec, "tree spec must look like 'regular:d=2' or 'gw:1=0.5,2=0.5'");
  }
  const auto kind = text.substr(0, colon);
  const auto body = text.substr(colon + 1);
  if (kind == "regular") {
    if (body.substr(0, 2) != "d=") throw Error(ErrorCode::BadTreeSpec, "expected 'regular:d=<int>'");
    return TreeSpec::regular(parse_count(body.substr(2), "d"), depth);
  }
  if (kind == "gw" || kind == "galton_watson") {
    std::vector<double> pmf;
    std::size_t pos = 0;
    while (pos <= body.size()) {
      const auto comma = std::min(body.find(',', pos), body.size());
      const auto item = body.substr(pos, comma - pos);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorCode::BadTreeSpec, "expected 'k=p' entries in '" + std::string(body) + "'");
      }
      const std::size_t k = parse_count(item.substr(0, eq), "offspring count");
      if (k > 100000) throw Error(ErrorCode::BadTreeSpec, "offspring count too large");
      if (pmf.size() <= k) pmf.resize(k + 1, 0.0);
      pmf[k] += parse_double(item.substr(eq + 1), "probability");
      pos = comma + 1;
    }
    return TreeSpec::galton_watson(std::move(pmf), depth);
  }
  throw Error(ErrorCode::BadTreeSpec, "unknown tree kind '" + std::string(kind) + "'");
}

// ---- SampledTree ----

std::vector<NodeId> SampledTree::children(NodeId v) const {
  std::vector<NodeId> out(child_count_[v]);
  std::iota(out.begin(), out.end(), first_child_[v]);
  return out;
}

std::vector<NodeId> SampledTree::subtree(NodeId v) const {
  std::vector<NodeId> out{v};
  for (std::size_t i = 0; i < out.size(); ++i) {
    const NodeId u = out[i];
    for (std::size_t c = 0; c < child_count_[u]; ++c) out.push_back(first_child_[u] + c);
  }
  return out;
}

std::vector<NodeId> SampledTree::leaves_under(NodeId v) const {
  std::vector<NodeId> out;
  for (NodeId u : subtree(v)) {
    if (is_leaf(u)) out.push_back(u);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SampledTree sample_tree(const TreeSpec& spec, std::mt19937_64& rng, std::size_t max_nodes) {
  spec.validate();
  if (spec.kind == TreeSpec::Kind::Regular) {
    return SampledTree::build(spec.depth, [&](NodeId) { return spec.d; }, max_nodes);
  }
  const auto cum = cumulative_of(spec.pmf);
  return SampledTree::build(
      spec.depth, [&](NodeId) { return draw_index(cum, uniform01(rng)); }, max_nodes);
}

SampledTree sample_tree(const TreeSpec& spec, std::uint64_t seed, std::size_t max_nodes) {
  auto rng = make_stream(seed, 0, kTreeStream);
  return sample_tree(spec, rng, max_nodes);
}

// ---- broadcast ----

void broadcast(const SampledTree& tree, const Channel& channel, std::mt19937_64& rng,
               Configuration& out) {
  const std::size_t q = channel.q();
  out.spins.resize(tree.size());
  const auto root_cum = cumulative_of(channel.stationary().values());
  std::vector<double> row_cum(q * q);
  for (std::size_t j = 0; j < q; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      acc += channel(j, i);
      row_cum[j * q + i] = acc;
    }
  }
  out.spins[0] = static_cast<std::uint32_t>(draw_index(root_cum, uniform01(rng)));
  for (NodeId v = 1; v < tree.size(); ++v) {
    const std::uint32_t parent_spin = out.spins[tree.parent(v)];
    const std::span<const double> cum(row_cum.data() + parent_spin * q, q);
    out.spins[v] = static_cast<std::uint32_t>(draw_index(cum, uniform01(rng)));
  }
}

Configuration broadcast(const SampledTree& tree, const Channel& channel, std::uint64_t seed) {
  auto rng = make_stream(seed, 0, kBroadcastStream);
  Configuration c;
  broadcast(tree, channel, rng, c);
  return c;
}

// ---- beliefs ----

std::size_t BeliefField::count() const {
  return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), true));
}

void BeliefField::set(NodeId v, const Belief& b) {
  if (b.size() != q_) throw Error(ErrorCode::BadDimension, "belief size differs from q");
  auto r = mutable_row(v);
  std::copy(b.values().begin(), b.values().end(), r.begin());
}

Belief BeliefField::at(NodeId v) const {
  if (!contains(v)) throw Error(ErrorCode::BadInput, "no belief stored for node " + std::to_string(v));
  const auto r = row(v);
  return Belief::normalized(std::vector<double>(r.begin(), r.end()));
}

BeliefField leaf_beliefs(const SampledTree& tree, const Configuration& config, std::size_t q) {
  if (config.spins.size() != tree.size()) {
    throw Error(ErrorCode::BadInput, "configuration does not match the tree");
  }
  BeliefField field(tree.size(), q);
  for (NodeId leaf : tree.leaves()) {
    const auto s = config.spins[leaf];
    if (s >= q) throw Error(ErrorCode::BadInput, "spin out of range");
    auto r = field.mutable_row(leaf);
    std::fill(r.begin(), r.end(), 0.0);
    r[s] = 1.0;
  }
  return field;
}

BeliefField belief_recursion(const SampledTree& tree, const Channel& channel,
                             const BeliefField& leaves) {
  const std::size_t q = channel.q();
  if (leaves.q() != q || leaves.nodes() != tree.size()) {
    throw Error(ErrorCode::BadDimension, "belief field does not match tree and channel");
  }
  std::vector<double> flat(tree.size() * q, 0.0);
  for (NodeId leaf : tree.leaves()) {
    if (!leaves.contains(leaf)) {
      throw Error(ErrorCode::BadInput, "missing belief for leaf " + std::to_string(leaf));
    }
    const auto r = leaves.row(leaf);
    std::copy(r.begin(), r.end(), flat.begin() + static_cast<std::ptrdiff_t>(leaf * q));
  }
  const RecursionTables tables(channel);
  std::vector<double> scratch;
  recurse_up(tree, tables, flat, nullptr, scratch);

  BeliefField out(tree.size(), q);
  for (NodeId v = 0; v < tree.size(); ++v) {
    auto r = out.mutable_row(v);
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(v * q), q, r.begin());
  }
  return out;
}

// ---- Monte Carlo ----

std::string_view to_string(AverageMode m) {
  return m == AverageMode::Annealed ? "annealed" : "quenched";
}

AverageMode parse_average_mode(std::string_view s) {
  if (s == "annealed") return AverageMode::Annealed;
  if (s == "quenched") return AverageMode::Quenched;
  throw Error(ErrorCode::BadInput, "mode must be 'annealed' or 'quenched'");
}

MonteCarloEstimate mc_root_entropy(const TreeSpec& spec, const Channel& channel,
                                   const MonteCarloOptions& options) {
  spec.validate();
  if (options.samples < 1) throw Error(ErrorCode::BadInput, "samples must be >= 1");

  const bool resample = spec.kind == TreeSpec::Kind::GaltonWatson &&
                        options.mode == AverageMode::Annealed;
  std::optional<SampledTree> fixed;
  if (!resample) fixed = sample_tree(spec, options.seed, options.max_nodes);

  const RecursionTables tables(channel);
  const auto alpha = channel.stationary().values();
  const std::size_t q = channel.q();
  std::vector<double> values(options.samples);
  const std::size_t blocks = (options.samples + kSampleBlock - 1) / kSampleBlock;

  parallel_for(blocks, options.threads, [&](std::size_t b) {
    Configuration config;
    std::vector<double> beliefs;
    std::vector<double> scratch;
    const std::size_t end = std::min(options.samples, (b + 1) * kSampleBlock);
    for (std::size_t i = b * kSampleBlock; i < end; ++i) {
      std::optional<SampledTree> own;
      if (resample) {
        auto trng = make_stream(options.seed, i, kTreeStream);
        own = sample_tree(spec, trng, options.max_nodes);
      }
      const SampledTree& tree = resample ? *own : *fixed;
      auto brng = make_stream(options.seed, i, kBroadcastStream);
      broadcast(tree, channel, brng, config);
      beliefs.assign(tree.size() * q, 0.0);
      recurse_up(tree, tables, beliefs, config.spins.data(), scratch);
      const double l = symmetrized_entropy(std::span<const double>(beliefs.data(), q), alpha);
      if (!std::isfinite(l)) {
        throw Error(ErrorCode::NumericalUnderflow, "root belief has an exactly zero entry");
      }
      values[i] = l;
    }
  });

  MonteCarloEstimate est;
  est.depth = spec.depth;
  est.samples = options.samples;
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    const double var = ss / static_cast<double>(values.size() - 1);
    est.std_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return est;
}

}  // namespace treerecon
