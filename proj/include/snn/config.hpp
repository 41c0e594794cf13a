#pragma once

// INI configuration for the CLI, read with boost::property_tree.
//
//   [dataset]
//   source = mnist            ; mnist | synthetic
//   mnist_dir = data/mnist    ; relative paths resolve against the config file
//   train_per_class = 1000    ; 0 keeps every sample
//   test_per_class = 200
//   seed = 7
//   classes = 10              ; synthetic only: classes, dim, separation
//   dim = 20
//   separation = 0.5
//
//   [training]
//   learning_rate = 0.01
//   momentum = 0.9
//   batch_size = 32
//   epochs = 10
//   glorot_fans = full        ; full | masked
//
//   [network]                 ; the default variant
//   label = base
//   hidden_sizes = 100
//   dropout = 0.2, 0.5        ; one rate per weight layer, or omit
//   sparse_layers = 0         ; weight layers that take the swept construction
//   topologies = regular_rotating:30, fully_connected   ; `train` only: kind[:k[:seed]]
//
//   [variant.NAME]            ; optional extra variants, same keys as [network]
//
//   [sweep]
//   constructions = regular_rotating, random_edge
//   degrees = 0.3, 0.1
//   degree_mode = density     ; density | count
//   repeats = 3
//   base_seed = 1
//   workers = 1
//
// '#' and ';' start a comment anywhere on a line. Profiles fill every key
// the file leaves out. Command-line flags override the file.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "snn/csv.hpp"
#include "snn/error.hpp"
#include "snn/experiment.hpp"
#include "snn/network.hpp"
#include "snn/topology.hpp"

namespace snn {

enum class Profile { Desk, Paper };

inline Profile parse_profile(std::string_view name) {
  if (name == "desk") return Profile::Desk;
  if (name == "paper") return Profile::Paper;
  throw Error(ErrorCode::Parse, "unknown profile '" + std::string(name) + "' (desk or paper)");
}

// Desk: 1000/200 samples per class, hidden 100, 10 epochs.
// Paper: full MNIST, hidden 300, 50 epochs, every construction over a
// density grid from 1% to 100%.
inline SweepSpec profile_defaults(Profile profile) {
  SweepSpec spec;
  spec.dataset.mnist_dir = "data/mnist";
  spec.dataset.seed = 7;
  spec.repeats = 1;
  spec.degree_mode = DegreeMode::Density;
  spec.constructions.assign(std::begin(kAllConstructions), std::end(kAllConstructions));
  if (profile == Profile::Desk) {
    spec.dataset.train_per_class = 1000;
    spec.dataset.test_per_class = 200;
    spec.training.epochs = 10;
    spec.variants = {Variant{"base", {100}, {}, {0}}};
    spec.degrees = {0.05, 0.1, 0.3};
  } else {
    spec.dataset.train_per_class = 0;
    spec.dataset.test_per_class = 0;
    spec.training.epochs = 50;
    spec.variants = {Variant{"base", {300}, {}, {0}}};
    spec.degrees = {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0};
    spec.repeats = 3;
  }
  return spec;
}

namespace detail {

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> list(const std::string& text) {
  std::vector<std::string> items;
  for (auto& part : csv::split(text)) {
    auto item = trim(part);
    if (!item.empty()) items.push_back(std::move(item));
  }
  return items;
}

inline std::vector<double> doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : list(text)) out.push_back(csv::parse_double(item));
  return out;
}

inline std::vector<std::size_t> counts(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : list(text)) out.push_back(csv::parse_u64(item));
  return out;
}

using Tree = boost::property_tree::ptree;

inline std::optional<std::string> get(const Tree& tree, const std::string& section, const std::string& key) {
  // '/' as path separator: section names such as "variant.x" contain dots.
  const auto sec = tree.get_child_optional(Tree::path_type(section, '/'));
  if (!sec) return std::nullopt;
  const auto value = sec->get_optional<std::string>(Tree::path_type(key, '/'));
  if (!value) return std::nullopt;
  // boost only knows whole-line comments
  return trim(value->substr(0, value->find_first_of(";#")));
}

// "kind", "kind:k" or "kind:k:seed".
inline ConstructionSpec parse_topology(const std::string& text) {
  const auto parts = csv::split(text, ':');
  ConstructionSpec spec;
  spec.kind = parse_construction(trim(parts[0]));
  if (parts.size() > 1) spec.k = csv::parse_u64(trim(parts[1]));
  if (parts.size() > 2) spec.seed = csv::parse_u64(trim(parts[2]));
  if (parts.size() > 3) throw Error(ErrorCode::Parse, "bad topology '" + text + "'");
  if (spec.kind != ConstructionKind::FullyConnected && spec.k == 0)
    throw Error(ErrorCode::Parse, "topology '" + text + "' needs a degree");
  return spec;
}

inline void read_variant(const Tree& tree, const std::string& section, Variant& v) {
  if (auto s = get(tree, section, "label")) v.label = *s;
  if (auto s = get(tree, section, "hidden_sizes")) v.hidden_sizes = counts(*s);
  if (auto s = get(tree, section, "dropout")) v.dropout_rates = doubles(*s);
  if (auto s = get(tree, section, "sparse_layers")) v.sparse_layers = counts(*s);
}

}  // namespace detail

struct ExperimentConfig {
  SweepSpec sweep;
  std::size_t workers = 1;
  std::vector<std::string> topologies;  // raw [network] topologies entries for `train`
};

inline ExperimentConfig load_config(const std::filesystem::path& path, Profile profile) {
  detail::Tree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
  const auto base = path.parent_path();
  using detail::get;

  ExperimentConfig cfg;
  SweepSpec& spec = cfg.sweep;
  spec = profile_defaults(profile);

  auto& ds = spec.dataset;
  if (auto s = get(tree, "dataset", "source")) {
    if (*s == "mnist")
      ds.source = DatasetSpec::Source::Mnist;
    else if (*s == "synthetic")
      ds.source = DatasetSpec::Source::Synthetic;
    else
      throw Error(ErrorCode::Parse, "dataset source must be mnist or synthetic");
  }
  if (auto s = get(tree, "dataset", "mnist_dir")) ds.mnist_dir = *s;
  if (ds.mnist_dir.is_relative()) ds.mnist_dir = base / ds.mnist_dir;
  if (auto s = get(tree, "dataset", "train_per_class")) ds.train_per_class = csv::parse_u64(*s);
  if (auto s = get(tree, "dataset", "test_per_class")) ds.test_per_class = csv::parse_u64(*s);
  if (auto s = get(tree, "dataset", "seed")) ds.seed = csv::parse_u64(*s);
  if (auto s = get(tree, "dataset", "classes")) ds.classes = csv::parse_u64(*s);
  if (auto s = get(tree, "dataset", "dim")) ds.dim = csv::parse_u64(*s);
  if (auto s = get(tree, "dataset", "separation")) ds.separation = csv::parse_double(*s);

  auto& tr = spec.training;
  if (auto s = get(tree, "training", "learning_rate")) tr.learning_rate = csv::parse_double(*s);
  if (auto s = get(tree, "training", "momentum")) tr.momentum = csv::parse_double(*s);
  if (auto s = get(tree, "training", "batch_size")) tr.batch_size = csv::parse_u64(*s);
  if (auto s = get(tree, "training", "epochs")) tr.epochs = csv::parse_u64(*s);
  if (auto s = get(tree, "training", "glorot_fans")) {
    if (*s == "full")
      tr.glorot_fans = GlorotFans::FullLayer;
    else if (*s == "masked")
      tr.glorot_fans = GlorotFans::MaskedDegree;
    else
      throw Error(ErrorCode::Parse, "glorot_fans must be full or masked");
  }

  Variant first = spec.variants.front();
  detail::read_variant(tree, "network", first);
  spec.variants = {first};
  for (const auto& [name, section] : tree) {
    if (name.rfind("variant.", 0) != 0) continue;
    Variant v = first;
    v.label = name.substr(8);
    v.dropout_rates.clear();
    detail::read_variant(tree, name, v);
    spec.variants.push_back(v);
  }
  if (auto s = get(tree, "network", "topologies")) cfg.topologies = detail::list(*s);

  if (auto s = get(tree, "sweep", "constructions")) {
    spec.constructions.clear();
    for (const auto& item : detail::list(*s)) spec.constructions.push_back(parse_construction(item));
  }
  if (auto s = get(tree, "sweep", "degrees")) spec.degrees = detail::doubles(*s);
  if (auto s = get(tree, "sweep", "degree_mode")) {
    if (*s == "density")
      spec.degree_mode = DegreeMode::Density;
    else if (*s == "count")
      spec.degree_mode = DegreeMode::Count;
    else
      throw Error(ErrorCode::Parse, "degree_mode must be density or count");
  }
  if (auto s = get(tree, "sweep", "repeats")) spec.repeats = csv::parse_u64(*s);
  if (auto s = get(tree, "sweep", "base_seed")) spec.base_seed = csv::parse_u64(*s);
  if (auto s = get(tree, "sweep", "workers")) cfg.workers = csv::parse_u64(*s);
  return cfg;
}

// Network config for the `train` command: the [network] variant with its
// explicit per-layer topologies (fully connected where none is given).
inline NetworkConfig single_network_config(const ExperimentConfig& cfg, const Dataset& data) {
  const SweepSpec& spec = cfg.sweep;
  const Variant& v = spec.variants.front();
  NetworkConfig net;
  net.layer_sizes = layer_sizes(v, data);
  net.learning_rate = spec.training.learning_rate;
  net.momentum = spec.training.momentum;
  net.batch_size = spec.training.batch_size;
  net.epochs = spec.training.epochs;
  net.glorot_fans = spec.training.glorot_fans;
  net.dropout_rates = v.dropout_rates;
  net.init_seed = spec.base_seed;
  if (cfg.topologies.size() > net.layer_sizes.size() - 1)
    throw Error(ErrorCode::DimensionMismatch, "more topologies than weight layers");
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    ConstructionSpec layer{ConstructionKind::FullyConnected, net.layer_sizes[l + 1], std::nullopt};
    if (l < cfg.topologies.size()) layer = detail::parse_topology(cfg.topologies[l]);
    if (is_random(layer.kind) && !layer.seed) layer.seed = derive_seed(spec.base_seed, {detail::kTopologyStream, l});
    net.topologies.push_back(layer);
  }
  return net;
}

}  // namespace snn
