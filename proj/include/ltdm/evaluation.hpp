// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltdm/core.hpp"

namespace ltdm {

struct DictionaryMetrics {
  double correct_recovery = 0.0;  // |est & truth| / |truth|
  double false_recovery = 0.0;    // |est \ truth| / |est|, 0 for an empty estimate
  std::map<std::size_t, double> hitting;  // per length present in the truth
  std::size_t true_patterns = 0;
  std::size_t estimated_patterns = 0;
  std::size_t shared_patterns = 0;
};

// Both dictionaries must use the same event id space.
DictionaryMetrics dictionary_metrics(const Dictionary& estimated, const Dictionary& truth);

// Re-expresses a dictionary over `target`, appending labels it lacks.
Dictionary remap_dictionary(const Dictionary& d, const std::vector<std::string>& from,
                            std::vector<std::string>& target);

// Minimum-cost one-to-one assignment of rows to columns of a square matrix.
// Exhaustive for n <= brute_force_limit, Hungarian algorithm otherwise.
std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost,
                                             std::size_t brute_force_limit = 8);
double assignment_cost(const std::vector<std::vector<double>>& cost,
                       const std::vector<std::size_t>& perm);

struct ClassComparison {
  std::optional<std::size_t> estimate;  // matched fitted class; none means phantom
  std::optional<double> pi_hat;
  std::optional<double> lambda_hat;
  std::optional<double> theta_rmse;  // over patterns shared by both dictionaries
};

struct AlignmentReport {
  std::size_t true_classes = 0;
  std::size_t estimated_classes = 0;
  // "exact", "truth padded with k phantom classes" or "estimate padded with k
  // phantom classes". Phantoms have zero weight and match nothing.
  std::string policy;
  // rho: fitted class for each true class (none for a phantom match).
  std::vector<ClassComparison> per_class;
  std::vector<std::size_t> unmatched_estimates;
  double cost = 0.0;
  std::size_t shared_patterns = 0;
  // Root mean squared errors over matched classes.
  std::optional<double> pi_rmse;
  std::optional<double> lambda_rmse;
  std::optional<double> theta_rmse;
};

// Chooses rho minimizing the summed squared error over pi, lambda and the
// theta entries of shared patterns. Dictionaries share one id space.
AlignmentReport align_and_rmse(const ModelParams& estimated, const Dictionary& estimated_dict,
                               const ModelParams& truth, const Dictionary& truth_dict,
                               std::size_t brute_force_limit = 8);

double class_recovery(const std::vector<std::size_t>& J_stars, std::size_t true_J);

struct ReplicationReport {
  std::string label;
  std::size_t J_star = 0;
  DictionaryMetrics dictionary;
  AlignmentReport alignment;
};

ReplicationReport evaluate_replication(std::string label, const ModelParams& estimated,
                                       const Dictionary& estimated_dict, std::size_t J_star,
                                       const ModelParams& truth, const Dictionary& truth_dict);

struct ClassAggregate {
  double pi_true = 0.0;
  double lambda_true = 0.0;
  std::size_t matched_runs = 0;
  std::optional<double> pi_mean;
  std::optional<double> pi_rmse;
  std::optional<double> lambda_mean;
  std::optional<double> lambda_rmse;
  std::optional<double> theta_rmse;
};

struct AggregateReport {
  std::size_t replications = 0;
  std::size_t true_classes = 0;
  double correct_recovery = 0.0;
  double false_recovery = 0.0;
  std::map<std::size_t, double> hitting;
  double class_recovery = 0.0;
  std::vector<std::size_t> J_stars;
  // Across replications, over runs in which the class was matched.
  std::vector<ClassAggregate> classes;
};

AggregateReport aggregate(const std::vector<ReplicationReport>& runs, const ModelParams& truth);

std::string replications_to_csv(const std::vector<ReplicationReport>& runs,
                                std::size_t true_classes);
nlohmann::json aggregate_to_json(const AggregateReport& a);
AggregateReport aggregate_from_json(const nlohmann::json& j);
// Aligned text tables: dictionary block, then pi and lambda rows per class.
std::string render_aggregate(const nlohmann::json& j);

}  // namespace ltdm
