// Apache License, Version 2.0, refer to LICENSE.txt

#include "ltdm/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "ltdm/dataset_io.hpp"
#include "ltdm/segmenter.hpp"

namespace ltdm {

namespace {

constexpr std::size_t kMaxListed = 20;

double unigram_theta(const ModelParams& p, const Dictionary& d, std::size_t j, EventId e) {
  auto idx = d.index_of(Pattern{e});
  if (!idx) return 0.0;
  return p.theta[j][*idx];
}

std::string sentence_text(const std::vector<EventId>& s, const std::vector<std::string>& alphabet) {
  return render_pattern(Pattern(s), alphabet);
}

Verdict combine(const std::vector<GroupReport>& groups) {
  bool cannot = false;
  for (const auto& g : groups) {
    if (g.verdict == Verdict::Fail) return Verdict::Fail;
    if (g.verdict == Verdict::CannotVerify) cannot = true;
  }
  return cannot ? Verdict::CannotVerify : Verdict::Pass;
}

std::vector<std::size_t> one_based(const std::vector<std::size_t>& g) {
  std::vector<std::size_t> out;
  for (auto c : g) out.push_back(c + 1);
  return out;
}

std::vector<std::size_t> zero_based(const std::vector<std::size_t>& g) {
  std::vector<std::size_t> out;
  for (auto c : g) {
    if (c == 0) throw MalformedRecord("class numbers in witness files start at 1");
    out.push_back(c - 1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<EventId> events_from_labels(const nlohmann::json& j, const std::vector<std::string>& alphabet) {
  std::vector<EventId> out;
  for (const auto& item : j) {
    std::string label = item.is_string() ? item.get<std::string>() : std::to_string(item.get<long long>());
    out.push_back(parse_pattern(label, alphabet).events.at(0));
  }
  return out;
}

nlohmann::json labels_from_events(const std::vector<EventId>& ev, const std::vector<std::string>& alphabet) {
  nlohmann::json out = nlohmann::json::array();
  for (EventId e : ev) out.push_back(e < alphabet.size() ? alphabet[e] : std::to_string(e));
  return out;
}

// Uniqueness half of C1.a; returns offending sentences.
std::vector<std::vector<EventId>> c1_uniqueness_failures(const std::vector<std::vector<EventId>>& blocks,
                                                         const PatternTrie& trie, std::size_t limit) {
  std::vector<std::vector<EventId>> bad;
  auto test = [&](std::vector<EventId> s) {
    if (bad.size() >= limit) return;
    if (count_separations(s, trie, 2) != 1) bad.push_back(std::move(s));
  };
  for (std::size_t a = 0; a < blocks.size(); ++a)
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (a == b) continue;
      for (EventId x : blocks[a])
        for (EventId y : blocks[b]) test({x, y});
    }
  if (blocks.size() == 3)
    for (EventId x : blocks[0])
      for (EventId y : blocks[1])
        for (EventId z : blocks[2]) test({x, y, z});
  return bad;
}

// C2.a (1): no separation of (w, e) uses an (l+1)-gram or another l-gram.
bool c2_probe_ok(const Pattern& w, EventId e, const Dictionary& d, const PatternTrie& trie) {
  std::vector<EventId> s = w.events;
  s.push_back(e);
  SeparationSet seps;
  try {
    seps = enumerate_separations(s, trie);
  } catch (const SeparationCapExceeded&) {
    return false;
  }
  const std::size_t l = w.length();
  for (const auto& sep : seps)
    for (auto idx : sep.parts) {
      const auto& p = d[idx];
      if (p.length() == l + 1) return false;
      if (p.length() == l && p != w) return false;
    }
  return true;
}

}  // namespace

ClassGroups equivalence_classes(const std::vector<double>& lambda, double eps) {
  if (!(eps > 0.0)) throw ContractViolation("lambda tolerance must be positive");
  std::vector<std::size_t> order(lambda.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return lambda[a] < lambda[b]; });
  ClassGroups groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || lambda[order[k]] - lambda[order[k - 1]] > eps) groups.emplace_back();
    groups.back().push_back(order[k]);
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::sort(groups.begin(), groups.end());
  return groups;
}

double fitted_lambda_tolerance(const std::vector<double>& lambda) {
  if (lambda.empty()) return 1e-9;
  return 0.05 * *std::min_element(lambda.begin(), lambda.end());
}

const char* to_string(A1Verdict v) {
  switch (v) {
    case A1Verdict::HoldsByDistinctLambda: return "holds_by_distinct_lambda";
    case A1Verdict::HoldsByPositiveTheta: return "holds_by_positive_theta";
    case A1Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::CannotVerify: return "cannot_verify";
  }
  return "cannot_verify";
}

A1Verdict check_A1_sufficient(const ModelParams& params, double eps) {
  auto groups = equivalence_classes(params.lambda, eps);
  if (groups.size() == params.lambda.size()) return A1Verdict::HoldsByDistinctLambda;
  for (const auto& row : params.theta)
    for (double t : row)
      if (!(t > 0.0)) return A1Verdict::Inconclusive;
  return A1Verdict::HoldsByPositiveTheta;
}

Eigen::MatrixXd build_T_matrix(const ModelParams& params, const Dictionary& d,
                               const std::vector<std::size_t>& group,
                               const std::vector<EventId>& probes) {
  Eigen::MatrixXd T(static_cast<Eigen::Index>(probes.size()), static_cast<Eigen::Index>(group.size()));
  for (std::size_t r = 0; r < probes.size(); ++r)
    for (std::size_t c = 0; c < group.size(); ++c) {
      double t = unigram_theta(params, d, group[c], probes[r]);
      if (t >= 1.0) throw DomainError("theta = 1 gives an unbounded T-matrix entry");
      T(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t / (1.0 - t);
    }
  return T;
}

Eigen::MatrixXd augment_with_ones(const Eigen::MatrixXd& T) {
  Eigen::MatrixXd A(T.rows() + 1, T.cols());
  A.row(0).setOnes();
  A.bottomRows(T.rows()) = T;
  return A;
}

std::size_t numeric_rank(const Eigen::MatrixXd& M, double rel_tol) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  double cut = rel_tol * s(0);
  std::size_t r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > cut) ++r;
  return r;
}

ConditionReport check_C1(const ModelParams& params, const Dictionary& d, const C1Witness& w,
                         const IdOptions& opt) {
  ConditionReport rep;
  PatternTrie trie(d);
  for (const auto& group : equivalence_classes(params.lambda, opt.lambda_eps)) {
    if (group.size() < 2) continue;
    GroupReport g;
    g.classes = group;
    auto it = w.per_group.find(group);
    const auto& blocks = it != w.per_group.end() ? it->second : w.default_blocks;
    if (blocks.empty()) {
      g.verdict = Verdict::CannotVerify;
      g.reasons.push_back("no 1-gram partition supplied for this group");
      rep.groups.push_back(std::move(g));
      continue;
    }
    bool fail = false;
    if (blocks.size() != 3) {
      fail = true;
      g.reasons.push_back("partition must have exactly three blocks");
    }
    std::set<EventId> seen;
    for (const auto& b : blocks) {
      if (b.size() < group.size()) {
        fail = true;
        g.reasons.push_back("a block has fewer 1-grams than the group has classes");
      }
      for (EventId e : b) {
        if (!seen.insert(e).second) {
          fail = true;
          g.reasons.push_back("blocks overlap at event " + std::to_string(e + 1));
        }
        if (!d.contains(Pattern{e})) {
          fail = true;
          g.reasons.push_back("event " + std::to_string(e + 1) + " is not a 1-gram of the dictionary");
        }
      }
    }
    for (auto& s : c1_uniqueness_failures(blocks, trie, kMaxListed)) {
      fail = true;
      g.failing_sentences.push_back(sentence_text(s, {}));
    }
    if (!g.failing_sentences.empty()) g.reasons.push_back("some block sentences admit several separations");
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      MatrixCheck mc;
      mc.name = "T" + std::to_string(k + 1);
      Eigen::MatrixXd T = build_T_matrix(params, d, group, blocks[k]);
      mc.matrix = opt.augment ? augment_with_ones(T) : T;
      mc.rank = numeric_rank(mc.matrix, opt.rank_tol);
      mc.required = group.size();
      if (mc.rank < mc.required) {
        fail = true;
        g.reasons.push_back(mc.name + " lacks full column rank");
      }
      g.matrices.push_back(std::move(mc));
    }
    g.verdict = fail ? Verdict::Fail : Verdict::Pass;
    rep.groups.push_back(std::move(g));
  }
  rep.verdict = combine(rep.groups);
  return rep;
}

ConditionReport check_C2(const ModelParams& params, const Dictionary& d, const C2Witness& w,
                         const IdOptions& opt) {
  ConditionReport rep;
  PatternTrie trie(d);
  for (const auto& group : equivalence_classes(params.lambda, opt.lambda_eps)) {
    if (group.size() < 2) continue;
    GroupReport g;
    g.classes = group;
    auto git = w.per_group.find(group);
    bool fail = false, missing = false;
    for (const auto& p : d) {
      if (p.length() < 2) continue;
      const std::vector<EventId>* probes = nullptr;
      if (git != w.per_group.end()) {
        auto it = git->second.find(p);
        if (it != git->second.end()) probes = &it->second;
      }
      if (!probes) {
        auto it = w.default_probes.find(p);
        if (it != w.default_probes.end()) probes = &it->second;
      }
      std::string name = render_pattern(p, {});
      if (!probes) {
        missing = true;
        g.reasons.push_back("no probe set supplied for " + name);
        continue;
      }
      if (probes->size() < group.size()) {
        fail = true;
        g.reasons.push_back("probe set for " + name + " is smaller than the group");
      }
      for (EventId e : *probes) {
        if (!c2_probe_ok(p, e, d, trie)) {
          fail = true;
          std::vector<EventId> s = p.events;
          s.push_back(e);
          if (g.failing_sentences.size() < kMaxListed) g.failing_sentences.push_back(sentence_text(s, {}));
        }
      }
      MatrixCheck mc;
      mc.name = "T" + name;
      Eigen::MatrixXd T = build_T_matrix(params, d, group, *probes);
      mc.matrix = opt.augment ? augment_with_ones(T) : T;
      mc.rank = numeric_rank(mc.matrix, opt.rank_tol);
      mc.required = group.size();
      if (mc.rank < mc.required) {
        fail = true;
        g.reasons.push_back(mc.name + " lacks full column rank");
      }
      g.matrices.push_back(std::move(mc));
    }
    if (!g.failing_sentences.empty()) g.reasons.push_back("some probe sentences admit competing separations");
    g.verdict = fail ? Verdict::Fail : (missing ? Verdict::CannotVerify : Verdict::Pass);
    rep.groups.push_back(std::move(g));
  }
  rep.verdict = combine(rep.groups);
  return rep;
}

SuggestedWitnesses suggest_witnesses(const ModelParams& params, const Dictionary& d,
                                     const IdOptions& opt) {
  SuggestedWitnesses out;
  PatternTrie trie(d);
  std::vector<EventId> unigrams;
  for (const auto& p : d)
    if (p.length() == 1) unigrams.push_back(p.events[0]);
  std::sort(unigrams.begin(), unigrams.end());

  // Events linked by a longer pattern stay in one block.
  std::map<EventId, EventId> parent;
  for (EventId e : unigrams) parent[e] = e;
  std::function<EventId(EventId)> root = [&](EventId e) {
    auto& p = parent[e];
    if (p != e) p = root(p);
    return p;
  };
  for (const auto& p : d) {
    if (p.length() < 2) continue;
    for (std::size_t u = 0; u + 1 < p.length(); ++u) {
      if (!parent.contains(p.events[u]) || !parent.contains(p.events[u + 1])) continue;
      EventId a = root(p.events[u]), b = root(p.events[u + 1]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::map<EventId, std::vector<EventId>> comp;
  for (EventId e : unigrams) comp[root(e)].push_back(e);
  std::vector<std::vector<EventId>> comps;
  for (auto& [r, members] : comp) comps.push_back(std::move(members));
  std::stable_sort(comps.begin(), comps.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  std::vector<std::vector<EventId>> blocks(3);
  for (auto& c : comps) {
    auto smallest = std::min_element(blocks.begin(), blocks.end(),
                                      [](const auto& a, const auto& b) { return a.size() < b.size(); });
    smallest->insert(smallest->end(), c.begin(), c.end());
  }
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  for (;;) {
    auto empty = std::find_if(blocks.begin(), blocks.end(), [](const auto& b) { return b.empty(); });
    if (empty == blocks.end()) break;
    auto largest = std::max_element(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) {
      return a.size() < b.size() || (a.size() == b.size() && !a.empty() && !b.empty() && a[0] > b[0]);
    });
    if (largest->size() < 2) break;
    std::size_t half = largest->size() / 2;
    std::vector<EventId> tail(largest->begin() + static_cast<std::ptrdiff_t>(half), largest->end());
    largest->resize(half);
    *empty = std::move(tail);
  }
  std::sort(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) {
    if (a.empty() || b.empty()) return b.empty() && !a.empty();
    return a[0] < b[0];
  });

  for (const auto& group : equivalence_classes(params.lambda, opt.lambda_eps)) {
    if (group.size() < 2) continue;
    out.c1.per_group[group] = blocks;
    std::map<Pattern, std::vector<EventId>> probes;
    for (const auto& p : d) {
      if (p.length() < 2) continue;
      std::vector<EventId> ok;
      for (EventId e : unigrams)
        if (c2_probe_ok(p, e, d, trie)) ok.push_back(e);
      std::vector<EventId> chosen;
      std::size_t rank = 0;
      for (EventId e : ok) {
        if (rank >= group.size()) break;
        auto trial = chosen;
        trial.push_back(e);
        Eigen::MatrixXd T = build_T_matrix(params, d, group, trial);
        std::size_t r = numeric_rank(opt.augment ? augment_with_ones(T) : T, opt.rank_tol);
        if (r > rank) {
          chosen = std::move(trial);
          rank = r;
        }
      }
      for (EventId e : ok) {
        if (chosen.size() >= group.size()) break;
        if (std::find(chosen.begin(), chosen.end(), e) == chosen.end()) chosen.push_back(e);
      }
      probes[p] = std::move(chosen);
    }
    out.c2.per_group[group] = std::move(probes);
  }
  return out;
}

Verdict IdentifiabilityReport::overall() const {
  if (!a2_offenders.empty()) return Verdict::Fail;
  if (c1.verdict == Verdict::Fail || c2.verdict == Verdict::Fail) return Verdict::Fail;
  if (c1.verdict == Verdict::CannotVerify || c2.verdict == Verdict::CannotVerify) return Verdict::CannotVerify;
  return Verdict::Pass;
}

IdentifiabilityReport check_identifiability(const ModelParams& params, const Dictionary& d,
                                            const C1Witness& c1, const C2Witness& c2,
                                            const IdOptions& opt) {
  params.validate(d.size());
  IdentifiabilityReport r;
  r.a1 = check_A1_sufficient(params, opt.lambda_eps);
  r.a2_offenders = validate_A2(d);
  r.groups = equivalence_classes(params.lambda, opt.lambda_eps);
  r.c1 = check_C1(params, d, c1, opt);
  r.c2 = check_C2(params, d, c2, opt);
  return r;
}

namespace {

nlohmann::json condition_json(const ConditionReport& c, const std::vector<std::string>& alphabet) {
  (void)alphabet;
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : c.groups) {
    nlohmann::json mats = nlohmann::json::array();
    for (const auto& m : g.matrices) {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index r = 0; r < m.matrix.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.matrix.cols()));
        for (Eigen::Index k = 0; k < m.matrix.cols(); ++k) row[static_cast<std::size_t>(k)] = m.matrix(r, k);
        rows.push_back(row);
      }
      mats.push_back({{"name", m.name}, {"rank", m.rank}, {"required", m.required}, {"rows", rows}});
    }
    groups.push_back({{"classes", one_based(g.classes)},
                      {"verdict", to_string(g.verdict)},
                      {"reasons", g.reasons},
                      {"failing_sentences", g.failing_sentences},
                      {"matrices", mats}});
  }
  return {{"verdict", to_string(c.verdict)}, {"groups", groups}};
}

}  // namespace

nlohmann::json report_to_json(const IdentifiabilityReport& r, const std::vector<std::string>& alphabet) {
  nlohmann::json offenders = nlohmann::json::array();
  for (const auto& p : r.a2_offenders) offenders.push_back(render_pattern(p, alphabet));
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : r.groups) groups.push_back(one_based(g));
  return {{"A1", to_string(r.a1)},
          {"A2", {{"holds", r.a2_offenders.empty()}, {"offenders", offenders}}},
          {"equivalence_classes", groups},
          {"C1", condition_json(r.c1, alphabet)},
          {"C2", condition_json(r.c2, alphabet)},
          {"witnesses_suggested", r.witnesses_suggested},
          {"overall", to_string(r.overall())}};
}

C1Witness c1_witness_from_json(const nlohmann::json& j, const std::vector<std::string>& alphabet) {
  C1Witness w;
  if (!j.contains("C1")) return w;
  const auto& c = j.at("C1");
  if (c.contains("default"))
    for (const auto& b : c.at("default")) w.default_blocks.push_back(events_from_labels(b, alphabet));
  if (c.contains("groups"))
    for (const auto& g : c.at("groups")) {
      std::vector<std::vector<EventId>> blocks;
      for (const auto& b : g.at("blocks")) blocks.push_back(events_from_labels(b, alphabet));
      w.per_group[zero_based(g.at("classes").get<std::vector<std::size_t>>())] = blocks;
    }
  return w;
}

C2Witness c2_witness_from_json(const nlohmann::json& j, const std::vector<std::string>& alphabet) {
  C2Witness w;
  if (!j.contains("C2")) return w;
  const auto& c = j.at("C2");
  auto read_map = [&](const nlohmann::json& m) {
    std::map<Pattern, std::vector<EventId>> out;
    for (auto it = m.begin(); it != m.end(); ++it)
      out[parse_pattern(it.key(), alphabet)] = events_from_labels(it.value(), alphabet);
    return out;
  };
  if (c.contains("default")) w.default_probes = read_map(c.at("default"));
  if (c.contains("groups"))
    for (const auto& g : c.at("groups"))
      w.per_group[zero_based(g.at("classes").get<std::vector<std::size_t>>())] = read_map(g.at("probes"));
  return w;
}

nlohmann::json witnesses_to_json(const C1Witness& c1, const C2Witness& c2,
                                 const std::vector<std::string>& alphabet) {
  nlohmann::json j1 = nlohmann::json::object();
  if (!c1.default_blocks.empty()) {
    nlohmann::json b = nlohmann::json::array();
    for (const auto& blk : c1.default_blocks) b.push_back(labels_from_events(blk, alphabet));
    j1["default"] = b;
  }
  nlohmann::json g1 = nlohmann::json::array();
  for (const auto& [g, blocks] : c1.per_group) {
    nlohmann::json b = nlohmann::json::array();
    for (const auto& blk : blocks) b.push_back(labels_from_events(blk, alphabet));
    g1.push_back({{"classes", one_based(g)}, {"blocks", b}});
  }
  j1["groups"] = g1;
  auto write_map = [&](const std::map<Pattern, std::vector<EventId>>& m) {
    nlohmann::json o = nlohmann::json::object();
    for (const auto& [p, ev] : m) o[render_pattern(p, alphabet)] = labels_from_events(ev, alphabet);
    return o;
  };
  nlohmann::json j2 = nlohmann::json::object();
  if (!c2.default_probes.empty()) j2["default"] = write_map(c2.default_probes);
  nlohmann::json g2 = nlohmann::json::array();
  for (const auto& [g, m] : c2.per_group) g2.push_back({{"classes", one_based(g)}, {"probes", write_map(m)}});
  j2["groups"] = g2;
  return {{"C1", j1}, {"C2", j2}};
}

}  // namespace ltdm
