// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ltdm/core.hpp"

namespace ltdm {

using ClassGroups = std::vector<std::vector<std::size_t>>;

// Single-linkage grouping of classes by |lambda_a - lambda_b| <= eps.
// Groups are ordered by their smallest member; members ascend.
ClassGroups equivalence_classes(const std::vector<double>& lambda, double eps = 1e-9);

// Default tolerance for fitted parameters: 5% of the smallest rate.
double fitted_lambda_tolerance(const std::vector<double>& lambda);

enum class A1Verdict { HoldsByDistinctLambda, HoldsByPositiveTheta, Inconclusive };
const char* to_string(A1Verdict v);

A1Verdict check_A1_sufficient(const ModelParams& params, double eps = 1e-9);

// phi = theta / (1 - theta) for the probe 1-grams (rows) and the classes of
// one group (columns). Throws DomainError when a probe has theta = 1.
Eigen::MatrixXd build_T_matrix(const ModelParams& params, const Dictionary& d,
                               const std::vector<std::size_t>& group,
                               const std::vector<EventId>& probes);

// Prepends a row of ones.
Eigen::MatrixXd augment_with_ones(const Eigen::MatrixXd& T);

// Singular values above rel_tol * sigma_max.
std::size_t numeric_rank(const Eigen::MatrixXd& M, double rel_tol = 1e-8);

enum class Verdict { Pass, Fail, CannotVerify };
const char* to_string(Verdict v);

struct MatrixCheck {
  std::string name;
  Eigen::MatrixXd matrix;
  std::size_t rank = 0;
  std::size_t required = 0;
};

struct GroupReport {
  std::vector<std::size_t> classes;
  Verdict verdict = Verdict::Pass;
  std::vector<std::string> reasons;
  std::vector<std::string> failing_sentences;
  std::vector<MatrixCheck> matrices;
};

struct ConditionReport {
  Verdict verdict = Verdict::Pass;
  std::vector<GroupReport> groups;
};

struct C1Witness {
  // Partition applied to every multi-class group without a specific entry.
  std::vector<std::vector<EventId>> default_blocks;
  std::map<std::vector<std::size_t>, std::vector<std::vector<EventId>>> per_group;
};

struct C2Witness {
  std::map<Pattern, std::vector<EventId>> default_probes;
  std::map<std::vector<std::size_t>, std::map<Pattern, std::vector<EventId>>> per_group;
};

struct IdOptions {
  double lambda_eps = 1e-9;
  double rank_tol = 1e-8;
  // Rank tests use the T-matrices with a leading row of ones.
  bool augment = true;
};

ConditionReport check_C1(const ModelParams& params, const Dictionary& d, const C1Witness& w,
                         const IdOptions& opt = {});
ConditionReport check_C2(const ModelParams& params, const Dictionary& d, const C2Witness& w,
                         const IdOptions& opt = {});

// Heuristic, budgeted search for witnesses. Results still need check_C1/C2.
struct SuggestedWitnesses {
  C1Witness c1;
  C2Witness c2;
};
SuggestedWitnesses suggest_witnesses(const ModelParams& params, const Dictionary& d,
                                     const IdOptions& opt = {});

struct IdentifiabilityReport {
  A1Verdict a1 = A1Verdict::Inconclusive;
  std::vector<Pattern> a2_offenders;
  ClassGroups groups;
  ConditionReport c1;
  ConditionReport c2;
  bool witnesses_suggested = false;

  // Pass only when A2 holds and both conditions pass.
  Verdict overall() const;
};

IdentifiabilityReport check_identifiability(const ModelParams& params, const Dictionary& d,
                                            const C1Witness& c1, const C2Witness& c2,
                                            const IdOptions& opt = {});

nlohmann::json report_to_json(const IdentifiabilityReport& r, const std::vector<std::string>& alphabet);

C1Witness c1_witness_from_json(const nlohmann::json& j, const std::vector<std::string>& alphabet);
C2Witness c2_witness_from_json(const nlohmann::json& j, const std::vector<std::string>& alphabet);
nlohmann::json witnesses_to_json(const C1Witness& c1, const C2Witness& c2,
                                 const std::vector<std::string>& alphabet);

}  // namespace ltdm
