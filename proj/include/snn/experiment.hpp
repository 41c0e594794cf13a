#pragma once

// Construction x degree sweeps, their CSV output, and the figure/correlation
// reports computed from a finished sweep CSV.
//
// Cells are enumerated in a fixed order (variant, construction, degree,
// repeat). Each cell's seed is
//   derive_seed(base_seed, {fnv1a64(construction), fnv1a64(degree text), repeat})
// so adding degrees or constructions never changes existing cells. Variants
// share seeds, which pairs e.g. a dropout variant with its baseline.
// Rows are committed to sweep.csv strictly in cell order by a single writer,
// so the file is identical for any worker count, and a restarted sweep
// resumes after the last complete row. Wall-clock times go to timings.csv.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "snn/csv.hpp"
#include "snn/dataset.hpp"
#include "snn/error.hpp"
#include "snn/network.hpp"
#include "snn/rng.hpp"
#include "snn/spectral.hpp"
#include "snn/topology.hpp"

namespace snn {

// ------------------------------------------------------------------ spec

struct DatasetSpec {
  enum class Source { Mnist, Synthetic };
  Source source = Source::Mnist;
  std::filesystem::path mnist_dir;
  std::size_t train_per_class = 1000;  // 0 keeps every sample
  std::size_t test_per_class = 200;
  std::uint64_t seed = 0;
  // Synthetic blobs only.
  std::size_t classes = 10;
  std::size_t dim = 20;
  double separation = 0.5;
};

struct TrainingSpec {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  GlorotFans glorot_fans = GlorotFans::FullLayer;
};

// One network shape within a sweep. sparse_layers lists the weight layers
// that take the swept construction; the rest are fully connected.
struct Variant {
  std::string label = "base";
  std::vector<std::size_t> hidden_sizes{100};
  std::vector<double> dropout_rates;  // empty or one per weight layer
  std::vector<std::size_t> sparse_layers{0};
};

enum class DegreeMode { Count, Density };

struct SweepSpec {
  DatasetSpec dataset;
  TrainingSpec training;
  std::vector<Variant> variants{Variant{}};
  std::vector<ConstructionKind> constructions;
  std::vector<double> degrees;
  DegreeMode degree_mode = DegreeMode::Density;
  std::size_t repeats = 1;
  std::uint64_t base_seed = 0;
};

inline void validate(const SweepSpec& spec) {
  if (spec.variants.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one variant");
  if (spec.constructions.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one construction");
  if (spec.degrees.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one degree");
  if (spec.repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
  for (double d : spec.degrees) {
    if (spec.degree_mode == DegreeMode::Density && !(d > 0.0 && d <= 1.0))
      throw Error(ErrorCode::InvalidDegree, "density " + csv::format(d) + " outside (0, 1]");
    if (spec.degree_mode == DegreeMode::Count && !(d >= 1.0 && d == std::floor(d)))
      throw Error(ErrorCode::InvalidDegree, "degree " + csv::format(d) + " is not a positive integer");
  }
  for (const auto& v : spec.variants) {
    if (v.label.empty() || v.label.find_first_of(",\n") != std::string::npos)
      throw Error(ErrorCode::InvalidArgument, "variant labels must be non-empty and free of commas");
    for (std::size_t l : v.sparse_layers)
      if (l > v.hidden_sizes.size())
        throw Error(ErrorCode::InvalidArgument, "variant " + v.label + ": sparse layer " + std::to_string(l) +
                                                    " does not exist");
    if (!v.dropout_rates.empty() && v.dropout_rates.size() != v.hidden_sizes.size() + 1)
      throw Error(ErrorCode::InvalidArgument, "variant " + v.label + ": need one dropout rate per weight layer");
  }
}

struct LoadedData {
  Dataset train;
  Dataset test;
};

inline LoadedData load_data(const DatasetSpec& spec) {
  if (spec.source == DatasetSpec::Source::Synthetic) {
    const std::size_t train_pc = std::max<std::size_t>(spec.train_per_class, 1);
    const std::size_t test_pc = std::max<std::size_t>(spec.test_per_class, 1);
    // Samples come out interleaved by class, so any prefix of whole rounds
    // is balanced.
    const auto all = synthetic_blobs(spec.classes, spec.dim, train_pc + test_pc, spec.separation, spec.seed);
    std::vector<std::size_t> first(train_pc * spec.classes), rest(test_pc * spec.classes);
    for (std::size_t i = 0; i < first.size(); ++i) first[i] = i;
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] = first.size() + i;
    return {select(all, first), select(all, rest)};
  }
  const auto& dir = spec.mnist_dir;
  return {load_idx_subsample(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte", spec.train_per_class,
                             derive_seed(spec.seed, {0})),
          load_idx_subsample(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte", spec.test_per_class,
                             derive_seed(spec.seed, {1}))};
}

// ------------------------------------------------------------------ cells

struct SweepCell {
  std::size_t variant = 0;
  ConstructionKind construction = ConstructionKind::FullyConnected;
  std::size_t degree_index = 0;
  std::size_t repeat = 0;
};

inline std::vector<SweepCell> enumerate_cells(const SweepSpec& spec) {
  std::vector<SweepCell> cells;
  for (std::size_t v = 0; v < spec.variants.size(); ++v)
    for (ConstructionKind kind : spec.constructions)
      for (std::size_t d = 0; d < spec.degrees.size(); ++d)
        for (std::size_t r = 0; r < spec.repeats; ++r) cells.push_back({v, kind, d, r});
  return cells;
}

// Fully connected cells ignore the degree, so their seed uses "-" in its place.
inline std::string degree_text(const SweepSpec& spec, const SweepCell& cell) {
  return csv::format(spec.degrees[cell.degree_index]);
}

inline std::uint64_t cell_seed(const SweepSpec& spec, const SweepCell& cell) {
  const std::string degree =
      cell.construction == ConstructionKind::FullyConnected ? std::string("-") : degree_text(spec, cell);
  return derive_seed(spec.base_seed, {fnv1a64(to_string(cell.construction)), fnv1a64(degree), cell.repeat});
}

namespace detail {
constexpr std::uint64_t kTopologyStream = 0x544F504F;  // "TOPO"
constexpr std::uint64_t kCellInitStream = 0x43454C4C;  // "CELL"
}  // namespace detail

// Row degree for weight layer `layer` with fan-out m.
inline std::size_t layer_degree(const SweepSpec& spec, double degree, ConstructionKind kind, std::size_t m) {
  if (spec.degree_mode == DegreeMode::Count) return static_cast<std::size_t>(degree);
  const std::size_t lo = kind == ConstructionKind::LongShortRotating ? 2 : 1;
  const auto k = static_cast<std::size_t>(std::llround(degree * static_cast<double>(m)));
  return std::clamp(k, std::min(lo, m), m);
}

inline std::vector<std::size_t> layer_sizes(const Variant& v, const Dataset& data) {
  std::vector<std::size_t> sizes{data.input_dim};
  sizes.insert(sizes.end(), v.hidden_sizes.begin(), v.hidden_sizes.end());
  sizes.push_back(data.class_count);
  return sizes;
}

inline NetworkConfig cell_network_config(const SweepSpec& spec, const SweepCell& cell,
                                         const std::vector<std::size_t>& sizes) {
  const Variant& v = spec.variants[cell.variant];
  const std::uint64_t seed = cell_seed(spec, cell);
  NetworkConfig cfg;
  cfg.layer_sizes = sizes;
  cfg.learning_rate = spec.training.learning_rate;
  cfg.momentum = spec.training.momentum;
  cfg.batch_size = spec.training.batch_size;
  cfg.epochs = spec.training.epochs;
  cfg.glorot_fans = spec.training.glorot_fans;
  cfg.dropout_rates = v.dropout_rates;
  cfg.init_seed = derive_seed(seed, {detail::kCellInitStream});
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const bool swept = std::find(v.sparse_layers.begin(), v.sparse_layers.end(), l) != v.sparse_layers.end();
    ConstructionSpec layer{ConstructionKind::FullyConnected, sizes[l + 1], std::nullopt};
    if (swept && cell.construction != ConstructionKind::FullyConnected) {
      layer.kind = cell.construction;
      layer.k = layer_degree(spec, spec.degrees[cell.degree_index], cell.construction, sizes[l + 1]);
      if (is_random(cell.construction)) layer.seed = derive_seed(seed, {detail::kTopologyStream, l});
    }
    cfg.topologies.push_back(layer);
  }
  return cfg;
}

// ------------------------------------------------------------------ CSV

inline constexpr const char* kLayerFields[] = {"construction", "k",          "seed",
                                               "density",      "components", "lambda2",
                                               "second_largest_nonzero",     "largest_nonzero",
                                               "weight_max",   "weight_min", "weight_std"};

inline std::size_t max_weight_layers(const SweepSpec& spec) {
  std::size_t depth = 0;
  for (const auto& v : spec.variants) depth = std::max(depth, v.hidden_sizes.size() + 1);
  return depth;
}

inline std::vector<std::string> sweep_header(std::size_t weight_layers) {
  std::vector<std::string> h{"label",          "construction",     "degree",     "repeat",        "cell_seed",
                             "status",         "error",            "layer_sizes", "network_density", "initial_accuracy",
                             "final_accuracy", "final_train_loss", "epoch_accuracy", "epoch_loss", "connectivity"};
  for (std::size_t l = 0; l < weight_layers; ++l)
    for (const char* f : kLayerFields) h.push_back("l" + std::to_string(l) + "_" + f);
  return h;
}

inline std::string join_sizes(const std::vector<std::size_t>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) out += (i ? "-" : "") + std::to_string(sizes[i]);
  return out;
}

inline std::string join_values(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ";" : "") + csv::format(values[i]);
  return out;
}

// Error text safe for an unquoted CSV field.
inline std::string csv_safe(std::string text) {
  for (char& c : text)
    if (c == ',' || c == '\n' || c == '\r') c = (c == ',') ? ';' : ' ';
  return text;
}

// Caches spectral reports by (construction spec, n, m). Deterministic
// topologies are shared by many cells; random ones carry their seed in the key.
class SpectralCache {
 public:
  SpectralReport get(const BipartiteTopology& t) {
    const Key key{static_cast<int>(t.kind), t.k, t.seed.value_or(0), t.seed.has_value(), t.n, t.m};
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    auto report = analyze(t);
    report.eigenvalues.clear();  // only the summary is kept
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, std::move(report)).first->second;
  }

 private:
  using Key = std::tuple<int, std::size_t, std::uint64_t, bool, std::size_t, std::size_t>;
  std::mutex mutex_;
  std::map<Key, SpectralReport> cache_;
};

struct CellOutcome {
  std::vector<std::string> row;
  double wall_seconds = 0.0;
  bool ok = false;
};

inline CellOutcome run_cell(const SweepSpec& spec, const SweepCell& cell, const LoadedData& data,
                            std::size_t weight_layers, SpectralCache& cache) {
  const Variant& v = spec.variants[cell.variant];
  const auto sizes = layer_sizes(v, data.train);
  const std::uint64_t seed = cell_seed(spec, cell);
  CellOutcome out;
  auto& row = out.row;
  row = {v.label, std::string(to_string(cell.construction)), degree_text(spec, cell), std::to_string(cell.repeat),
         std::to_string(seed)};
  const auto start = std::chrono::steady_clock::now();
  try {
    const NetworkConfig cfg = cell_network_config(spec, cell, sizes);
    Network net = init_network(cfg);
    std::vector<SpectralReport> spectra;
    double edges = 0.0, possible = 0.0;
    for (const auto& layer : net.layers) {
      spectra.push_back(cache.get(layer_topology(layer)));
      edges += static_cast<double>(layer.weights.nnz());
      possible += static_cast<double>(layer.fan_in() * layer.fan_out());
    }
    const TrainRecord rec = train(net, data.train, data.test);
    std::vector<double> accs, losses;
    for (const auto& e : rec.epochs) {
      accs.push_back(e.test_accuracy);
      losses.push_back(e.train_loss);
    }
    row.insert(row.end(), {"ok", "", join_sizes(sizes), csv::format(edges / possible), csv::format(rec.initial_accuracy),
                           csv::format(rec.final_accuracy()),
                           rec.epochs.empty() ? std::string() : csv::format(rec.epochs.back().train_loss),
                           join_values(accs), join_values(losses), csv::format(spectra[0].algebraic_connectivity_standard)});
    for (std::size_t l = 0; l < weight_layers; ++l) {
      if (l >= net.layers.size()) {
        row.insert(row.end(), std::size(kLayerFields), "");
        continue;
      }
      const auto& spec_l = cfg.topologies[l];
      const auto& layer = net.layers[l];
      const auto& s = spectra[l];
      const auto& w = rec.weight_stats[l];
      row.insert(row.end(),
                 {std::string(to_string(spec_l.kind)), std::to_string(layer.construction.k),
                  spec_l.seed ? std::to_string(*spec_l.seed) : std::string("-"),
                  csv::format(static_cast<double>(layer.weights.nnz()) /
                              static_cast<double>(layer.fan_in() * layer.fan_out())),
                  std::to_string(s.component_count), csv::format(s.algebraic_connectivity_standard),
                  csv::format(s.second_largest_nonzero), csv::format(s.largest_nonzero), csv::format(w.max),
                  csv::format(w.min), csv::format(w.std)});
    }
    out.ok = true;
  } catch (const std::exception& e) {
    row.resize(5);
    row.insert(row.end(), {"failed", csv_safe(e.what()), join_sizes(sizes)});
    row.resize(sweep_header(weight_layers).size());
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ------------------------------------------------------------------ runner

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::size_t workers = 1;
  // Stop after this many newly written rows (simulates an interruption).
  std::size_t max_new_cells = std::numeric_limits<std::size_t>::max();
  std::ostream* log = nullptr;
};

struct SweepSummary {
  std::filesystem::path csv_path;
  std::size_t total = 0;
  std::size_t resumed = 0;  // rows already present before this run
  std::size_t written = 0;
  std::size_t failed = 0;
  bool complete() const { return resumed + written == total; }
};

namespace detail {

// Reads an existing sweep.csv, drops a trailing partial line, and checks that
// the complete rows are exactly the first cells of this sweep. Returns how
// many cells are done; the file is truncated to its complete rows.
inline std::size_t prepare_resume(const std::filesystem::path& path, const std::string& header_line,
                                  const SweepSpec& spec, const std::vector<SweepCell>& cells) {
  if (!std::filesystem::exists(path)) return 0;
  std::string content;
  {
    std::ifstream in(path, std::ios::binary);
    content.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  const std::size_t last_newline = content.rfind('\n');
  if (last_newline == std::string::npos) {
    std::filesystem::resize_file(path, 0);
    return 0;
  }
  content.resize(last_newline + 1);
  std::istringstream lines(content);
  std::string line;
  std::getline(lines, line);
  if (line != header_line)
    throw Error(ErrorCode::Parse, path.string() + " was written by a different sweep (header differs)");
  std::size_t done = 0;
  while (std::getline(lines, line)) {
    if (done >= cells.size()) throw Error(ErrorCode::Parse, path.string() + " has more rows than the sweep has cells");
    const auto fields = csv::split(line);
    const SweepCell& c = cells[done];
    if (fields.size() < 4 || fields[0] != spec.variants[c.variant].label || fields[1] != to_string(c.construction) ||
        fields[2] != degree_text(spec, c) || fields[3] != std::to_string(c.repeat))
      throw Error(ErrorCode::Parse, path.string() + " row " + std::to_string(done + 1) + " does not match this sweep");
    ++done;
  }
  std::filesystem::resize_file(path, content.size());
  return done;
}

}  // namespace detail

inline SweepSummary run_sweep(const SweepSpec& spec, const RunOptions& opts) {
  validate(spec);
  const auto cells = enumerate_cells(spec);
  const std::size_t layers = max_weight_layers(spec);
  const auto header = sweep_header(layers);
  const std::string header_line = csv::join(header);

  std::filesystem::create_directories(opts.out_dir);
  SweepSummary summary;
  summary.csv_path = opts.out_dir / "sweep.csv";
  summary.total = cells.size();
  summary.resumed = detail::prepare_resume(summary.csv_path, header_line, spec, cells);

  std::ofstream out(summary.csv_path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + summary.csv_path.string());
  if (std::filesystem::file_size(summary.csv_path) == 0) out << header_line << '\n' << std::flush;
  const auto timings_path = opts.out_dir / "timings.csv";
  const bool new_timings = !std::filesystem::exists(timings_path);
  std::ofstream timings(timings_path, std::ios::app);
  if (new_timings) timings << "label,construction,degree,repeat,wall_seconds\n";

  const std::size_t limit =
      summary.resumed + std::min(cells.size() - summary.resumed, opts.max_new_cells);
  if (summary.resumed >= limit) return summary;

  const LoadedData data = load_data(spec.dataset);
  SpectralCache cache;

  // Fully connected cells do not depend on the degree: train once per
  // (variant, repeat) and reuse the row with the degree column swapped.
  std::mutex fc_mutex;
  std::map<std::pair<std::size_t, std::size_t>, CellOutcome> fc_rows;

  std::atomic<std::size_t> next{summary.resumed};
  std::mutex ready_mutex;
  std::condition_variable ready_cv;
  std::map<std::size_t, CellOutcome> ready;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= limit) return;
      const SweepCell& cell = cells[i];
      CellOutcome outcome;
      if (cell.construction == ConstructionKind::FullyConnected) {
        const auto key = std::make_pair(cell.variant, cell.repeat);
        std::optional<CellOutcome> cached;
        {
          std::lock_guard lock(fc_mutex);
          if (auto it = fc_rows.find(key); it != fc_rows.end()) cached = it->second;
        }
        if (cached) {
          outcome = *cached;
          outcome.row[2] = degree_text(spec, cell);
          outcome.wall_seconds = 0.0;
        } else {
          outcome = run_cell(spec, cell, data, layers, cache);
          std::lock_guard lock(fc_mutex);
          fc_rows.emplace(key, outcome);
        }
      } else {
        outcome = run_cell(spec, cell, data, layers, cache);
      }
      {
        std::lock_guard lock(ready_mutex);
        ready.emplace(i, std::move(outcome));
      }
      ready_cv.notify_all();
    }
  };

  const std::size_t worker_count = std::max<std::size_t>(1, std::min(opts.workers, limit - summary.resumed));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < worker_count; ++w) pool.emplace_back(worker);

  for (std::size_t i = summary.resumed; i < limit; ++i) {
    CellOutcome outcome;
    {
      std::unique_lock lock(ready_mutex);
      ready_cv.wait(lock, [&] { return ready.count(i) > 0; });
      outcome = std::move(ready.at(i));
      ready.erase(i);
    }
    out << csv::join(outcome.row) << '\n' << std::flush;
    timings << outcome.row[0] << ',' << outcome.row[1] << ',' << outcome.row[2] << ',' << outcome.row[3] << ','
            << csv::format(outcome.wall_seconds) << '\n'
            << std::flush;
    ++summary.written;
    if (!outcome.ok) ++summary.failed;
    if (opts.log)
      *opts.log << "[" << (i + 1) << "/" << cells.size() << "] " << outcome.row[0] << ' ' << outcome.row[1]
                << " degree=" << outcome.row[2] << " repeat=" << outcome.row[3] << ' '
                << (outcome.ok ? "acc=" + outcome.row[10] : "FAILED: " + outcome.row[6]) << '\n'
                << std::flush;
  }
  for (auto& t : pool) t.join();
  if (!out) throw Error(ErrorCode::Io, "failed writing " + summary.csv_path.string());
  return summary;
}

inline csv::Table read_sweep(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return csv::read_table(in);
}

// ------------------------------------------------------------------ reports

// Pearson correlation; nullopt when either column has zero variance.
inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "pearson needs equal-length columns");
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

namespace detail {

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double population_std(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Groups row indices by a key, keeping keys in order of first appearance.
template <class Key>
struct OrderedGroups {
  std::vector<Key> keys;
  std::map<Key, std::vector<std::size_t>> members;

  void add(const Key& key, std::size_t row) {
    auto [it, inserted] = members.try_emplace(key);
    if (inserted) keys.push_back(key);
    it->second.push_back(row);
  }
};

inline std::vector<std::size_t> ok_rows(const csv::Table& t) {
  std::vector<std::size_t> rows;
  const std::size_t status = t.column("status");
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (t.rows[r][status] == "ok") rows.push_back(r);
  return rows;
}

inline double num(const csv::Table& t, std::size_t row, std::size_t col) { return csv::parse_double(t.rows[row][col]); }

}  // namespace detail

// Per (label, degree) band across the sparse constructions: Pearson r between
// layer-0 connectivity and final accuracy, under both readings of
// "connectivity". Bands with fewer than 3 rows are flagged "insufficient",
// zero-variance bands "degenerate".
inline csv::Table correlation_report(const csv::Table& sweep) {
  csv::Table out;
  out.header = {"label", "degree", "samples", "r_lambda2", "r_second_largest_nonzero", "status"};
  const std::size_t label = sweep.column("label"), construction = sweep.column("construction"),
                    degree = sweep.column("degree"), acc = sweep.column("final_accuracy"),
                    lambda2 = sweep.column("l0_lambda2"), second = sweep.column("l0_second_largest_nonzero");
  detail::OrderedGroups<std::pair<std::string, std::string>> bands;
  for (std::size_t r : detail::ok_rows(sweep))
    if (sweep.rows[r][construction] != to_string(ConstructionKind::FullyConnected))
      bands.add({sweep.rows[r][label], sweep.rows[r][degree]}, r);
  for (const auto& key : bands.keys) {
    const auto& rows = bands.members.at(key);
    std::vector<double> x, x2, y;
    for (std::size_t r : rows) {
      x.push_back(detail::num(sweep, r, lambda2));
      x2.push_back(detail::num(sweep, r, second));
      y.push_back(detail::num(sweep, r, acc));
    }
    std::vector<std::string> line{key.first, key.second, std::to_string(rows.size()), "", "", ""};
    if (rows.size() < 3) {
      line[5] = "insufficient";
    } else {
      const auto r1 = pearson(x, y);
      const auto r2 = pearson(x2, y);
      if (r1) line[3] = csv::format(*r1);
      if (r2) line[4] = csv::format(*r2);
      line[5] = r1 ? "ok" : "degenerate";
    }
    out.rows.push_back(std::move(line));
  }
  return out;
}

struct FigureTable {
  std::string name;
  csv::Table table;
};

// Figure tables, all computed from status=ok rows.
//   fig2_accuracy_vs_density     mean/std final accuracy per (label, construction, degree)
//   fig3_construction_comparison the same cells side by side with the fully connected delta
//   fig4_variants                each variant against the first variant at equal cells
//   fig5_connectivity_scatter    one point per network
//   fig6_weight_stats            stored-weight statistics per layer, mean over runs
inline std::vector<FigureTable> figure_tables(const csv::Table& sweep) {
  const std::size_t label = sweep.column("label"), construction = sweep.column("construction"),
                    degree = sweep.column("degree"), repeat = sweep.column("repeat"),
                    acc = sweep.column("final_accuracy"), net_density = sweep.column("network_density"),
                    sizes = sweep.column("layer_sizes");
  const auto ok = detail::ok_rows(sweep);
  const std::string fc(to_string(ConstructionKind::FullyConnected));

  using CellKey = std::tuple<std::string, std::string, std::string>;  // label, construction, degree
  detail::OrderedGroups<CellKey> cells;
  for (std::size_t r : ok) cells.add({sweep.rows[r][label], sweep.rows[r][construction], sweep.rows[r][degree]}, r);
  auto accuracies = [&](const std::vector<std::size_t>& rows) {
    std::vector<double> v;
    for (std::size_t r : rows) v.push_back(detail::num(sweep, r, acc));
    return v;
  };
  auto mean_column = [&](const std::vector<std::size_t>& rows, std::size_t col) {
    std::vector<double> v;
    for (std::size_t r : rows) v.push_back(detail::num(sweep, r, col));
    return detail::mean_of(v);
  };

  std::vector<FigureTable> out;

  csv::Table fig2;
  fig2.header = {"label", "construction", "degree", "l0_k", "l0_density", "network_density",
                 "mean_accuracy", "std_accuracy", "runs"};
  const std::size_t l0k = sweep.column("l0_k"), l0d = sweep.column("l0_density");
  for (const auto& key : cells.keys) {
    const auto& rows = cells.members.at(key);
    const auto a = accuracies(rows);
    fig2.rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), sweep.rows[rows[0]][l0k],
                         sweep.rows[rows[0]][l0d], csv::format(mean_column(rows, net_density)),
                         csv::format(detail::mean_of(a)), csv::format(detail::population_std(a)),
                         std::to_string(rows.size())});
  }
  out.push_back({"fig2_accuracy_vs_density", std::move(fig2)});

  csv::Table fig3;
  fig3.header = {"label", "construction", "degree", "mean_accuracy", "min_accuracy", "max_accuracy",
                 "delta_vs_fully_connected"};
  for (const auto& key : cells.keys) {
    const auto a = accuracies(cells.members.at(key));
    std::string delta;
    if (auto it = cells.members.find({std::get<0>(key), fc, std::get<2>(key)}); it != cells.members.end())
      delta = csv::format(detail::mean_of(a) - detail::mean_of(accuracies(it->second)));
    fig3.rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), csv::format(detail::mean_of(a)),
                         csv::format(*std::min_element(a.begin(), a.end())),
                         csv::format(*std::max_element(a.begin(), a.end())), delta});
  }
  out.push_back({"fig3_construction_comparison", std::move(fig3)});

  csv::Table fig4;
  fig4.header = {"label", "layer_sizes", "construction", "degree", "network_density", "mean_accuracy",
                 "delta_vs_first_label"};
  const std::string first_label = cells.keys.empty() ? std::string() : std::get<0>(cells.keys.front());
  for (const auto& key : cells.keys) {
    const auto& rows = cells.members.at(key);
    const double mean = detail::mean_of(accuracies(rows));
    std::string delta;
    if (auto it = cells.members.find({first_label, std::get<1>(key), std::get<2>(key)}); it != cells.members.end())
      delta = csv::format(mean - detail::mean_of(accuracies(it->second)));
    fig4.rows.push_back({std::get<0>(key), sweep.rows[rows[0]][sizes], std::get<1>(key), std::get<2>(key),
                         csv::format(mean_column(rows, net_density)), csv::format(mean), delta});
  }
  out.push_back({"fig4_variants", std::move(fig4)});

  csv::Table fig5;
  fig5.header = {"label", "construction", "degree", "repeat", "lambda2", "second_largest_nonzero",
                 "largest_nonzero", "final_accuracy"};
  const std::size_t lam = sweep.column("l0_lambda2"), sec = sweep.column("l0_second_largest_nonzero"),
                    lar = sweep.column("l0_largest_nonzero");
  for (std::size_t r : ok) {
    const auto& row = sweep.rows[r];
    fig5.rows.push_back({row[label], row[construction], row[degree], row[repeat], row[lam], row[sec], row[lar], row[acc]});
  }
  out.push_back({"fig5_connectivity_scatter", std::move(fig5)});

  csv::Table fig6;
  fig6.header = {"construction", "k", "layer", "max", "min", "std"};
  std::size_t layers = 0;
  while (std::find(sweep.header.begin(), sweep.header.end(), "l" + std::to_string(layers) + "_k") != sweep.header.end())
    ++layers;
  using StatKey = std::tuple<std::string, std::string, std::size_t>;  // construction, degree, layer
  detail::OrderedGroups<StatKey> stats;
  for (std::size_t r : ok)
    for (std::size_t l = 0; l < layers; ++l)
      if (!sweep.rows[r][sweep.column("l" + std::to_string(l) + "_k")].empty())
        stats.add({sweep.rows[r][construction], sweep.rows[r][degree], l}, r);
  for (const auto& key : stats.keys) {
    const auto& rows = stats.members.at(key);
    const std::string p = "l" + std::to_string(std::get<2>(key)) + "_";
    fig6.rows.push_back({std::get<0>(key), sweep.rows[rows[0]][sweep.column(p + "k")], std::to_string(std::get<2>(key)),
                         csv::format(mean_column(rows, sweep.column(p + "weight_max"))),
                         csv::format(mean_column(rows, sweep.column(p + "weight_min"))),
                         csv::format(mean_column(rows, sweep.column(p + "weight_std")))});
  }
  out.push_back({"fig6_weight_stats", std::move(fig6)});
  return out;
}

// Writes every figure table plus correlations.csv into `dir`.
inline std::vector<std::filesystem::path> write_reports(const csv::Table& sweep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const csv::Table& table) {
    const auto path = dir / (name + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
    table.write(out);
    written.push_back(path);
  };
  for (const auto& fig : figure_tables(sweep)) emit(fig.name, fig.table);
  emit("correlations", correlation_report(sweep));
  return written;
}

// Rebuilds layer `layer` of a sweep row from its topology columns and
// recomputes the spectral summary.
inline SpectralReport recompute_spectrum(const csv::Table& sweep, std::size_t row, std::size_t layer) {
  const auto& r = sweep.rows[row];
  const std::string p = "l" + std::to_string(layer) + "_";
  const auto sizes = csv::split(r[sweep.column("layer_sizes")], '-');
  ConstructionSpec spec;
  spec.kind = parse_construction(r[sweep.column(p + "construction")]);
  spec.k = csv::parse_u64(r[sweep.column(p + "k")]);
  if (const auto& s = r[sweep.column(p + "seed")]; s != "-") spec.seed = csv::parse_u64(s);
  return analyze(build(spec, csv::parse_u64(sizes.at(layer)), csv::parse_u64(sizes.at(layer + 1))));
}

}  // namespace snn
