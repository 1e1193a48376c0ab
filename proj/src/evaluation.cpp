// Apache License, Version 2.0, refer to LICENSE.txt

#include "ltdm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace ltdm {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(17);
  o << x;
  return o.str();
}

json opt(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::vector<std::size_t> hungarian(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0], j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 1; j <= n; ++j) perm[p[j] - 1] = j - 1;
  return perm;
}

std::string lengths_key(std::size_t l) { return std::to_string(l); }

}  // namespace

DictionaryMetrics dictionary_metrics(const Dictionary& estimated, const Dictionary& truth) {
  DictionaryMetrics m;
  m.true_patterns = truth.size();
  m.estimated_patterns = estimated.size();
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> by_len;  // hits, total
  for (const auto& p : truth) {
    auto& slot = by_len[p.length()];
    ++slot.second;
    if (estimated.contains(p)) {
      ++slot.first;
      ++m.shared_patterns;
    }
  }
  m.correct_recovery = truth.empty() ? 1.0 : double(m.shared_patterns) / double(truth.size());
  m.false_recovery = estimated.empty()
                         ? 0.0
                         : double(estimated.size() - m.shared_patterns) / double(estimated.size());
  for (const auto& [l, c] : by_len) m.hitting[l] = double(c.first) / double(c.second);
  return m;
}

Dictionary remap_dictionary(const Dictionary& d, const std::vector<std::string>& from,
                            std::vector<std::string>& target) {
  Dictionary out;
  for (const auto& p : d) {
    std::vector<EventId> ev;
    for (EventId e : p.events) {
      std::string label = e < from.size() ? from[e] : std::to_string(e);
      auto it = std::find(target.begin(), target.end(), label);
      if (it == target.end()) {
        target.push_back(label);
        it = target.end() - 1;
      }
      ev.push_back(static_cast<EventId>(it - target.begin()));
    }
    out.add(Pattern(std::move(ev)));
  }
  return out;
}

double assignment_cost(const std::vector<std::vector<double>>& cost,
                       const std::vector<std::size_t>& perm) {
  double total = 0.0;
  for (std::size_t r = 0; r < perm.size(); ++r) total += cost[r][perm[r]];
  return total;
}

std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost,
                                             std::size_t brute_force_limit) {
  const std::size_t n = cost.size();
  for (const auto& row : cost)
    if (row.size() != n) throw ContractViolation("assignment cost matrix must be square");
  if (n > brute_force_limit) return hungarian(cost);
  std::vector<std::size_t> perm(n), best;
  std::iota(perm.begin(), perm.end(), 0);
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = assignment_cost(cost, perm);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

AlignmentReport align_and_rmse(const ModelParams& estimated, const Dictionary& estimated_dict,
                               const ModelParams& truth, const Dictionary& truth_dict,
                               std::size_t brute_force_limit) {
  estimated.validate(estimated_dict.size());
  truth.validate(truth_dict.size());
  AlignmentReport r;
  r.true_classes = truth.classes();
  r.estimated_classes = estimated.classes();
  const std::size_t J = r.true_classes, H = r.estimated_classes, n = std::max(J, H);
  if (J == H) {
    r.policy = "exact";
  } else if (H > J) {
    r.policy = "truth padded with " + std::to_string(H - J) + " phantom classes";
  } else {
    r.policy = "estimate padded with " + std::to_string(J - H) + " phantom classes";
  }

  std::vector<std::pair<std::size_t, std::size_t>> shared;  // truth index, estimate index
  for (std::size_t w = 0; w < truth_dict.size(); ++w)
    if (auto e = estimated_dict.index_of(truth_dict[w])) shared.emplace_back(w, *e);
  r.shared_patterns = shared.size();

  auto sq = [](double x) { return x * x; };
  auto theta_sse = [&](std::size_t t, std::size_t h) {
    double s = 0.0;
    for (auto [w, e] : shared) s += sq(truth.theta[t][w] - estimated.theta[h][e]);
    return s;
  };
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t h = 0; h < n; ++h) {
      if (t < J && h < H) {
        cost[t][h] = sq(truth.pi[t] - estimated.pi[h]) +
                     sq(truth.lambda[t] - estimated.lambda[h]) + theta_sse(t, h);
      } else if (t < J) {
        cost[t][h] = sq(truth.pi[t]);
      } else if (h < H) {
        cost[t][h] = sq(estimated.pi[h]);
      }
    }
  }
  auto perm = min_cost_assignment(cost, brute_force_limit);
  r.cost = assignment_cost(cost, perm);

  double pi_sse = 0.0, lambda_sse = 0.0, theta_total = 0.0;
  std::size_t matched = 0;
  r.per_class.resize(J);
  for (std::size_t t = 0; t < J; ++t) {
    std::size_t h = perm[t];
    if (h >= H) continue;
    auto& c = r.per_class[t];
    c.estimate = h;
    c.pi_hat = estimated.pi[h];
    c.lambda_hat = estimated.lambda[h];
    double ts = theta_sse(t, h);
    if (!shared.empty()) c.theta_rmse = std::sqrt(ts / double(shared.size()));
    pi_sse += sq(truth.pi[t] - estimated.pi[h]);
    lambda_sse += sq(truth.lambda[t] - estimated.lambda[h]);
    theta_total += ts;
    ++matched;
  }
  for (std::size_t t = J; t < n; ++t)
    if (perm[t] < H) r.unmatched_estimates.push_back(perm[t]);
  std::sort(r.unmatched_estimates.begin(), r.unmatched_estimates.end());
  if (matched) {
    r.pi_rmse = std::sqrt(pi_sse / double(matched));
    r.lambda_rmse = std::sqrt(lambda_sse / double(matched));
    if (!shared.empty()) r.theta_rmse = std::sqrt(theta_total / double(matched * shared.size()));
  }
  return r;
}

double class_recovery(const std::vector<std::size_t>& J_stars, std::size_t true_J) {
  if (J_stars.empty()) throw ContractViolation("class recovery needs at least one run");
  auto hits = std::count(J_stars.begin(), J_stars.end(), true_J);
  return double(hits) / double(J_stars.size());
}

ReplicationReport evaluate_replication(std::string label, const ModelParams& estimated,
                                       const Dictionary& estimated_dict, std::size_t J_star,
                                       const ModelParams& truth, const Dictionary& truth_dict) {
  ReplicationReport r;
  r.label = std::move(label);
  r.J_star = J_star;
  r.dictionary = dictionary_metrics(estimated_dict, truth_dict);
  r.alignment = align_and_rmse(estimated, estimated_dict, truth, truth_dict);
  return r;
}

AggregateReport aggregate(const std::vector<ReplicationReport>& runs, const ModelParams& truth) {
  if (runs.empty()) throw ContractViolation("aggregate needs at least one replication");
  AggregateReport a;
  a.replications = runs.size();
  a.true_classes = truth.classes();
  std::map<std::size_t, std::pair<double, std::size_t>> hit_sums;
  for (const auto& r : runs) {
    if (r.alignment.true_classes != truth.classes())
      throw ContractViolation("replication compared against a different truth");
    a.correct_recovery += r.dictionary.correct_recovery;
    a.false_recovery += r.dictionary.false_recovery;
    for (auto [l, h] : r.dictionary.hitting) {
      hit_sums[l].first += h;
      ++hit_sums[l].second;
    }
    a.J_stars.push_back(r.J_star);
  }
  a.correct_recovery /= double(runs.size());
  a.false_recovery /= double(runs.size());
  for (auto [l, s] : hit_sums) a.hitting[l] = s.first / double(s.second);
  a.class_recovery = class_recovery(a.J_stars, truth.classes());

  a.classes.resize(truth.classes());
  for (std::size_t t = 0; t < truth.classes(); ++t) {
    auto& c = a.classes[t];
    c.pi_true = truth.pi[t];
    c.lambda_true = truth.lambda[t];
    double pi_sum = 0, pi_sse = 0, la_sum = 0, la_sse = 0, th_sse = 0;
    std::size_t th_n = 0;
    for (const auto& r : runs) {
      const auto& pc = r.alignment.per_class[t];
      if (!pc.estimate) continue;
      ++c.matched_runs;
      pi_sum += *pc.pi_hat;
      pi_sse += (*pc.pi_hat - c.pi_true) * (*pc.pi_hat - c.pi_true);
      la_sum += *pc.lambda_hat;
      la_sse += (*pc.lambda_hat - c.lambda_true) * (*pc.lambda_hat - c.lambda_true);
      if (pc.theta_rmse) {
        th_sse += *pc.theta_rmse * *pc.theta_rmse;
        ++th_n;
      }
    }
    if (c.matched_runs) {
      double k = double(c.matched_runs);
      c.pi_mean = pi_sum / k;
      c.pi_rmse = std::sqrt(pi_sse / k);
      c.lambda_mean = la_sum / k;
      c.lambda_rmse = std::sqrt(la_sse / k);
    }
    if (th_n) c.theta_rmse = std::sqrt(th_sse / double(th_n));
  }
  return a;
}

std::string replications_to_csv(const std::vector<ReplicationReport>& runs,
                                std::size_t true_classes) {
  std::vector<std::size_t> lengths;
  for (const auto& r : runs)
    for (const auto& [l, h] : r.dictionary.hitting)
      if (std::find(lengths.begin(), lengths.end(), l) == lengths.end()) lengths.push_back(l);
  std::sort(lengths.begin(), lengths.end());

  std::string out = "replication,J_star,correct_recovery,false_recovery";
  for (auto l : lengths) out += ",hit_" + std::to_string(l);
  out += ",class_recovered,policy";
  for (std::size_t c = 1; c <= true_classes; ++c) {
    auto s = std::to_string(c);
    out += ",pi_hat_" + s + ",lambda_hat_" + s + ",theta_rmse_" + s;
  }
  out += "\n";
  auto cell = [](const std::optional<double>& x) { return x ? fmt(*x) : std::string(); };
  for (const auto& r : runs) {
    out += r.label + "," + std::to_string(r.J_star) + "," + fmt(r.dictionary.correct_recovery) +
           "," + fmt(r.dictionary.false_recovery);
    for (auto l : lengths) {
      auto it = r.dictionary.hitting.find(l);
      out += "," + (it == r.dictionary.hitting.end() ? std::string() : fmt(it->second));
    }
    out += std::string(",") + (r.J_star == true_classes ? "1" : "0") + ",\"" +
           r.alignment.policy + "\"";
    for (std::size_t c = 0; c < true_classes; ++c) {
      if (c < r.alignment.per_class.size()) {
        const auto& pc = r.alignment.per_class[c];
        out += "," + cell(pc.pi_hat) + "," + cell(pc.lambda_hat) + "," + cell(pc.theta_rmse);
      } else {
        out += ",,,";
      }
    }
    out += "\n";
  }
  return out;
}

json aggregate_to_json(const AggregateReport& a) {
  json hitting = json::object();
  for (auto [l, h] : a.hitting) hitting[lengths_key(l)] = h;
  json classes = json::array();
  for (std::size_t t = 0; t < a.classes.size(); ++t) {
    const auto& c = a.classes[t];
    classes.push_back({{"class", t + 1},
                       {"pi_true", c.pi_true},
                       {"lambda_true", c.lambda_true},
                       {"matched_runs", c.matched_runs},
                       {"pi_mean", opt(c.pi_mean)},
                       {"pi_rmse", opt(c.pi_rmse)},
                       {"lambda_mean", opt(c.lambda_mean)},
                       {"lambda_rmse", opt(c.lambda_rmse)},
                       {"theta_rmse", opt(c.theta_rmse)}});
  }
  return {{"replications", a.replications},
          {"true_classes", a.true_classes},
          {"correct_recovery", a.correct_recovery},
          {"false_recovery", a.false_recovery},
          {"hitting", std::move(hitting)},
          {"class_recovery", a.class_recovery},
          {"J_star", a.J_stars},
          {"classes", std::move(classes)}};
}

AggregateReport aggregate_from_json(const json& j) {
  AggregateReport a;
  try {
    a.replications = j.at("replications").get<std::size_t>();
    a.true_classes = j.at("true_classes").get<std::size_t>();
    a.correct_recovery = j.at("correct_recovery").get<double>();
    a.false_recovery = j.at("false_recovery").get<double>();
    for (const auto& [k, v] : j.at("hitting").items()) a.hitting[std::stoul(k)] = v.get<double>();
    a.class_recovery = j.at("class_recovery").get<double>();
    a.J_stars = j.value("J_star", std::vector<std::size_t>{});
    for (const auto& c : j.at("classes")) {
      ClassAggregate ca;
      ca.pi_true = c.at("pi_true").get<double>();
      ca.lambda_true = c.at("lambda_true").get<double>();
      ca.matched_runs = c.value("matched_runs", std::size_t{0});
      ca.pi_mean = opt_from(c, "pi_mean");
      ca.pi_rmse = opt_from(c, "pi_rmse");
      ca.lambda_mean = opt_from(c, "lambda_mean");
      ca.lambda_rmse = opt_from(c, "lambda_rmse");
      ca.theta_rmse = opt_from(c, "theta_rmse");
      a.classes.push_back(ca);
    }
  } catch (const json::exception& e) {
    throw MalformedRecord(std::string("aggregate report schema: ") + e.what());
  } catch (const std::logic_error& e) {
    throw MalformedRecord(std::string("aggregate report schema: ") + e.what());
  }
  return a;
}

std::string render_aggregate(const json& j) {
  AggregateReport a = aggregate_from_json(j);
  auto pct = [](double x) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(1) << 100.0 * x << " %";
    return o.str();
  };
  auto num = [](const std::optional<double>& x, int prec) {
    if (!x) return std::string("-");
    std::ostringstream o;
    o << std::fixed << std::setprecision(prec) << *x;
    return o.str();
  };
  auto table = [](const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows) {
      if (width.size() < r.size()) width.resize(r.size(), 0);
      for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    std::string out;
    for (const auto& r : rows) {
      std::string line;
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (c) line += "  ";
        line += std::string(width[c] - r[c].size(), ' ') + r[c];
      }
      out += line + "\n";
    }
    return out;
  };

  std::vector<std::vector<std::string>> top{{"Correct recovery", "False recovery"}};
  std::vector<std::string> vals{pct(a.correct_recovery), pct(a.false_recovery)};
  for (auto [l, h] : a.hitting) {
    if (l < 2) continue;
    top[0].push_back(std::to_string(l) + "-gram hitting");
    vals.push_back(pct(h));
  }
  top[0].push_back("Class recovery");
  vals.push_back(pct(a.class_recovery));
  top.push_back(vals);

  std::vector<std::vector<std::string>> cls{{""}, {"pi"}, {"pi hat"}, {"RMSE"},
                                            {"lambda"}, {"lambda hat"}, {"RMSE"}};
  for (std::size_t t = 0; t < a.classes.size(); ++t) {
    const auto& c = a.classes[t];
    cls[0].push_back("C" + std::to_string(t + 1));
    cls[1].push_back(num(c.pi_true, 3));
    cls[2].push_back(num(c.pi_mean, 3));
    cls[3].push_back(num(c.pi_rmse, 3));
    cls[4].push_back(num(c.lambda_true, 3));
    cls[5].push_back(num(c.lambda_mean, 3));
    cls[6].push_back(num(c.lambda_rmse, 3));
  }
  std::string out = "Replications: " + std::to_string(a.replications) + "\n\n";
  out += table(top) + "\n" + table(cls);
  return out;
}

}  // namespace ltdm
