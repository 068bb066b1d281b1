#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "ginv/app.hpp"
#include "ginv/errors.hpp"
#include "ginv/parallel.hpp"
#include "ginv/vocabulary.hpp"
#include "../util/byte_io.hpp"

namespace ginv::app {

namespace fs = std::filesystem;

namespace {

struct Settings {
  Graphon graphon{ErGraphon{0.5}};
  std::vector<std::uint32_t> sizes{100, 200, 400};
  int k = 3;
  std::vector<double> epsilons{0.02, 0.05, 0.1};
  int trials = 200;
  bool cross_sizes = false;
  std::uint64_t seed = 0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["graphon"] = graphon_to_json(graphon);
    j["sizes"] = sizes;
    j["k"] = k;
    j["epsilons"] = epsilons;
    j["trials"] = trials;
    j["cross_sizes"] = cross_sizes;
    j["seed"] = seed;
    return j;
  }
};

Settings resolve(const BoundCheckCommand& cmd) {
  Settings s;
  if (!cmd.common.config.empty()) {
    const auto j = read_json_file(cmd.common.config);
    if (!j.is_object()) throw ConfigError("bound_check: must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      const std::string field = "bound_check." + key;
      try {
        if (key == "graphon") {
          s.graphon = parse_graphon(value, field);
        } else if (key == "sizes") {
          s.sizes = value.get<std::vector<std::uint32_t>>();
        } else if (key == "k") {
          s.k = value.get<int>();
        } else if (key == "epsilons") {
          s.epsilons = value.get<std::vector<double>>();
        } else if (key == "trials") {
          s.trials = value.get<int>();
        } else if (key == "cross_sizes") {
          s.cross_sizes = value.get<bool>();
        } else if (key == "seed") {
          s.seed = value.get<std::uint64_t>();
        } else {
          throw ConfigError(field + ": unknown field");
        }
      } catch (const nlohmann::json::exception&) {
        throw ConfigError(field + ": wrong type");
      }
    }
  }
  if (cmd.graphon) s.graphon = *cmd.graphon;
  if (!cmd.sizes.empty()) s.sizes = cmd.sizes;
  if (cmd.k) s.k = *cmd.k;
  if (!cmd.epsilons.empty()) s.epsilons = cmd.epsilons;
  if (cmd.trials) s.trials = *cmd.trials;
  if (cmd.cross_sizes) s.cross_sizes = true;
  if (cmd.common.seed) s.seed = *cmd.common.seed;

  if (s.k < 1 || s.k > kMaxPatternSize) throw ConfigError("bound_check.k: must be in [1, 8]");
  if (s.trials < 1) throw ConfigError("bound_check.trials: must be >= 1");
  if (s.sizes.empty()) throw ConfigError("bound_check.sizes: must be nonempty");
  for (auto n : s.sizes)
    if (n < static_cast<std::uint32_t>(s.k)) throw ConfigError("bound_check.sizes: every size must be >= k");
  if (s.epsilons.empty()) throw ConfigError("bound_check.epsilons: must be nonempty");
  for (double e : s.epsilons)
    if (!(e > 0.0)) throw ConfigError("bound_check.epsilons: values must be positive");
  std::sort(s.sizes.begin(), s.sizes.end());
  s.sizes.erase(std::unique(s.sizes.begin(), s.sizes.end()), s.sizes.end());
  return s;
}

// TInd densities of every connected pattern with 1..k vertices.
std::map<PatternCode, double> le_k_tind(const Graph& g, int k) {
  std::map<PatternCode, double> out;
  for (int size = 1; size <= k; ++size) {
    for (const auto& e : exact_census(g, size, Norm::kTInd).entries) out[e.code] = e.density;
  }
  return out;
}

double sup_distance(const std::map<PatternCode, double>& a, const std::map<PatternCode, double>& b) {
  double d = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      d = std::max(d, std::abs(ia->second));
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      d = std::max(d, std::abs(ib->second));
      ++ib;
    } else {
      d = std::max(d, std::abs(ia->second - ib->second));
      ++ia;
      ++ib;
    }
  }
  return d;
}

}  // namespace

void cmd_bound_check(const BoundCheckCommand& cmd, const Io& io) {
  const auto t0 = std::chrono::steady_clock::now();
  const Settings s = resolve(cmd);
  const fs::path out = cmd.common.out.empty() ? fs::path("bound_check") : fs::path(cmd.common.out);

  std::vector<AttrId> alphabet{0};
  if (s.graphon.attributed()) alphabet = {kRed, kBlue, kGreen, kYellow};
  const std::size_t vocab_size = enumerate_vocabulary_up_to(s.k, alphabet).size();

  // Two graphs per (size, trial); cross-size cells pair side 0 of one size
  // with side 1 of another at the same trial index.
  Environment env;
  if (s.graphon.attributed()) env.attr_cuts = attr_cuts_from_frequencies(0.5, 0.5);
  const std::size_t per_size = 2 * static_cast<std::size_t>(s.trials);
  std::vector<std::map<PatternCode, double>> dens(s.sizes.size() * per_size);
  parallel_for(dens.size(), cmd.common.threads, [&](std::size_t i) {
    const std::uint32_t n = s.sizes[i / per_size];
    const std::uint64_t trial = (i % per_size) / 2, side = i % 2;
    const auto purpose = static_cast<std::uint64_t>(StreamPurpose::kBoundCheck);
    auto latent = RngStream::derive(s.seed, {purpose, n, trial, side,
                                             static_cast<std::uint64_t>(StreamPurpose::kVertexLatent)});
    auto edges = RngStream::derive(s.seed, {purpose, n, trial, side,
                                            static_cast<std::uint64_t>(StreamPurpose::kEdgeNoise)});
    dens[i] = le_k_tind(sample_graph(s.graphon, env, n, latent, edges), s.k);
  });

  struct Cell {
    std::uint32_t n_a, n_b;
    std::size_t ia, ib;
  };
  std::vector<Cell> cells;
  for (std::size_t a = 0; a < s.sizes.size(); ++a) {
    cells.push_back({s.sizes[a], s.sizes[a], a, a});
  }
  if (s.cross_sizes) {
    for (std::size_t a = 0; a < s.sizes.size(); ++a)
      for (std::size_t b = a + 1; b < s.sizes.size(); ++b) cells.push_back({s.sizes[a], s.sizes[b], a, b});
  }

  std::ostringstream csv;
  csv << "n_train,n_test,epsilon,trials,exceedances,exceedance_rate,rhs,within_bound\n";
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  bool all_within = true;
  bool monotone = true;
  const double kk = static_cast<double>(s.k) * s.k;
  for (double eps : s.epsilons) {
    double previous_rate = 2.0;
    for (const Cell& c : cells) {
      std::size_t exceed = 0;
      for (int t = 0; t < s.trials; ++t) {
        const auto& a = dens[c.ia * per_size + 2 * t];
        const auto& b = dens[c.ib * per_size + 2 * t + 1];
        if (sup_distance(a, b) > eps) ++exceed;
      }
      const double rate = static_cast<double>(exceed) / s.trials;
      const double rhs = std::min(1.0, 2.0 * static_cast<double>(vocab_size) *
                                           (std::exp(-eps * eps * c.n_a / (8.0 * kk)) +
                                            std::exp(-eps * eps * c.n_b / (8.0 * kk))));
      const bool within = rate <= rhs;
      all_within &= within;
      if (c.n_a == c.n_b) {
        monotone &= rate <= previous_rate;
        previous_rate = rate;
      }
      csv << c.n_a << ',' << c.n_b << ',' << format_double(eps) << ',' << s.trials << ',' << exceed << ','
          << format_double(rate) << ',' << format_double(rhs) << ',' << (within ? 1 : 0) << '\n';
      rows.push_back({{"n_train", c.n_a}, {"n_test", c.n_b}, {"epsilon", eps}, {"trials", s.trials},
                      {"exceedances", exceed}, {"exceedance_rate", rate}, {"rhs", rhs}, {"within_bound", within}});
    }
  }
  nlohmann::ordered_json summary;
  summary["settings"] = s.to_json();
  summary["num_patterns"] = vocab_size;
  summary["all_within_bound"] = all_within;
  summary["non_increasing_in_n"] = monotone;
  summary["cells"] = rows;
  fs::create_directories(out);
  detail::atomic_write(out / "bound_check.csv", csv.str());
  detail::atomic_write(out / "bound_check.json", summary.dump(2) + "\n");
  write_manifest(out, "bound-check", s.to_json(), s.seed, {"bound_check.csv", "bound_check.json"},
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), cmd.common.threads);
  io.print(std::string("bound check: ") + (all_within ? "all cells within the bound" : "some cells exceed the bound") +
           ", exceedance " + (monotone ? "non-increasing" : "not monotone") + " in N\n");
}

}  // namespace ginv::app
