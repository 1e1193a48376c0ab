// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ltdm/core.hpp"
#include "ltdm/random.hpp"
#include "ltdm/segmenter.hpp"

namespace ltdm {

struct FitConfig {
  std::size_t outer_iterations = 400;
  std::size_t inner_sweeps = 5;
  std::optional<std::size_t> burn_in;      // default: half of outer_iterations
  std::optional<double> tau;               // default: 1/sqrt(m)
  std::optional<std::size_t> add_count;    // S, per class and length; default 2*M1
  std::optional<std::size_t> init_count;   // S0, per length; default M1
  std::size_t max_pattern_length = 3;      // L
  std::size_t initial_classes = 20;
  double initial_alpha = 1.0;
  std::uint64_t seed = 1;
  bool use_time = true;
  bool condition_on_K = false;
  bool freeze_dictionary = false;
  bool single_class = false;
  std::vector<Pattern> initial_patterns;  // added to the 1-grams at start
  std::size_t consensus_window = 100;
  // Classes holding at least this share of records supply trim evidence;
  // default half of 1/sqrt(m). The largest class always counts.
  std::optional<double> trim_min_share;
  // Split-merge proposals per outer iteration, run after the trim step.
  std::size_t split_merge_attempts = 20;
  std::size_t threads = 1;
  bool keep_draws = false;
};

struct TracePoint {
  std::size_t iteration = 0;
  double log_likelihood = 0.0;  // complete-data, at the end of the iteration
  std::size_t dictionary_size = 0;
  std::size_t occupied_classes = 0;
  std::size_t large_classes = 0;  // record share above 1/sqrt(m)
  double alpha = 0.0;
};

struct DrawClass {
  std::size_t slot = 0;
  double share = 0.0;
  double lambda = 0.0;
};

struct Draw {
  std::size_t iteration = 0;
  double kappa = 0.0;
  std::vector<DrawClass> classes;
};

struct FitResult {
  std::vector<std::string> alphabet;
  Dictionary dictionary;      // consensus dictionary, 1-grams first then by length
  std::size_t J_star = 0;
  ModelParams params;         // reported classes, renormalized, sorted by weight
  std::vector<double> raw_share;  // unnormalized record share per reported class
  std::vector<int> modal_class;   // per record; -1 when the modal slot is not reported
  std::vector<TracePoint> trace;
  double first_half_mean = 0.0;
  double second_half_mean = 0.0;
  std::size_t retained_draws = 0;
  std::vector<Draw> draws;
  double threshold = 0.0;     // 1/sqrt(m)
  double tau = 0.0;
  std::size_t add_count = 0;
  std::size_t init_count = 0;
};

nlohmann::json fit_result_to_json(const FitResult& r);
FitResult fit_result_from_json(const nlohmann::json& j);
std::string trace_to_csv(const FitResult& r);
std::string draws_to_csv(const FitResult& r);

// Exact forward-filtering backward-sampling over separations of one sentence.
// Edges are the dictionary matches inside the sentence.
struct SentenceEdge {
  std::uint16_t start = 0;
  std::uint16_t length = 0;
  std::uint32_t pattern = 0;
};

std::vector<SentenceEdge> sentence_edges(std::span<const EventId> E, const PatternTrie& trie);

// Draws a separation with probability proportional to
// (1/n_S!) prod_{w in S} theta_w / (1 - theta_w); logit[w] is that log ratio.
// Returns false when the sentence has no separation.
bool sample_separation(Engine& rng, std::span<const EventId> E,
                       std::span<const SentenceEdge> edges, std::span<const double> logit,
                       std::vector<std::uint32_t>& out);

// Stick-breaking helpers.
std::vector<double> stick_weights(std::span<const double> V);

struct StickBounds {
  double lo = 0.0;
  double hi = 1.0;
};

// Truncation interval for V_j given slice variables and labels.
StickBounds stick_bounds(std::size_t j, std::span<const double> V, std::span<const double> u,
                         std::span<const std::size_t> z);

FitResult fit(const Dataset& data, const FitConfig& config);

// Inspectable sampler for the slice-Gibbs steps; fit() drives it.
class Sampler {
 public:
  Sampler(const Dataset& data, const FitConfig& config);
  ~Sampler();
  Sampler(const Sampler&) = delete;
  Sampler& operator=(const Sampler&) = delete;

  void update_slices();
  void update_theta();
  void update_lambda();
  void update_sticks();
  void update_labels();
  // Sequentially allocated split-merge move with theta and lambda of the two
  // classes integrated out. Returns the number of accepted proposals.
  std::size_t split_merge();
  void update_separations();
  void update_kappa_alpha();
  void sweep();

  // Dictionary moves; each returns the number of patterns added or removed.
  std::size_t search_and_split();
  std::size_t trim_dictionary();

  double complete_log_likelihood() const;

  // State access for tests and the driver.
  std::size_t records() const;
  std::size_t classes() const;        // instantiated classes
  std::size_t max_label() const;      // j*, zero-based
  std::span<const std::size_t> labels() const;
  std::vector<double> sticks() const;
  std::span<const double> slices() const;
  double alpha() const;
  double kappa() const;
  double lambda(std::size_t j) const;
  double theta(std::size_t j, const Pattern& p) const;
  std::vector<std::size_t> class_sizes() const;
  Dictionary dictionary() const;
  std::vector<std::vector<Pattern>> current_separations(std::size_t i) const;

  // Test hooks.
  void set_labels(std::span<const std::size_t> z);
  void set_sticks(std::span<const double> V);
  void set_slices(std::span<const double> u);
  void set_alpha(double a);
  void set_kappa(double k);
  void set_lambda(std::size_t j, double value);
  void set_theta(std::size_t j, const Pattern& p, double value);
  // Replaces the observed data while keeping parameters (used by joint-
  // distribution tests); separations are taken as given.
  void replace_data(const Dataset& data, const std::vector<std::vector<std::vector<Pattern>>>& seps);

  struct Impl;

 private:
  friend FitResult fit(const Dataset& data, const FitConfig& config);
  std::unique_ptr<Impl> impl_;
};

}  // namespace ltdm
