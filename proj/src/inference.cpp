// Apache License, Version 2.0, refer to LICENSE.txt

#include "ltdm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "ltdm/dataset_io.hpp"
#include "ltdm/model.hpp"

namespace ltdm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kThetaMin = 1e-300;
constexpr double kThetaMax = 1.0 - 1e-15;
constexpr std::size_t kLaunchScans = 3;

double lse2(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double mx = std::max(a, b);
  return mx + std::log(std::exp(a - mx) + std::exp(b - mx));
}

double clamp_theta(double t) { return std::clamp(t, kThetaMin, kThetaMax); }

template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& f) {
  if (threads <= 1 || n < 2 * threads) {
    f(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    std::size_t b = t * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&f, b, e] { f(b, e); });
  }
  for (auto& th : pool) th.join();
}

// Exhaustive fallback used when rejection keeps producing repeated parts.
bool enumerate_and_sample(Engine& rng, std::size_t n, std::span<const SentenceEdge> edges,
                          std::span<const double> logit, std::vector<std::uint32_t>& out) {
  std::vector<std::vector<std::uint32_t>> all;
  std::vector<double> weight;
  std::vector<std::uint32_t> stack;
  double acc = 0.0;
  std::function<void(std::size_t)> dfs = [&](std::size_t pos) {
    if (pos == n) {
      if (all.size() >= kDefaultSeparationCap)
        throw SeparationCapExceeded("sentence exceeds the separation cap");
      all.push_back(stack);
      weight.push_back(acc - std::lgamma(static_cast<double>(stack.size()) + 1.0));
      return;
    }
    for (const auto& e : edges) {
      if (e.start != pos) continue;
      if (std::find(stack.begin(), stack.end(), e.pattern) != stack.end()) continue;
      stack.push_back(e.pattern);
      acc += logit[e.pattern];
      dfs(pos + e.length);
      acc -= logit[e.pattern];
      stack.pop_back();
    }
  };
  dfs(0);
  std::size_t pick = sample_log_categorical(rng, weight);
  if (pick >= all.size()) return false;
  out = all[pick];
  return true;
}

}  // namespace

std::vector<SentenceEdge> sentence_edges(std::span<const EventId> E, const PatternTrie& trie) {
  std::vector<SentenceEdge> edges;
  for (std::size_t p = 0; p < E.size(); ++p) {
    trie.for_each_prefix(E.subspan(p), [&](std::size_t len, std::uint32_t id) {
      edges.push_back(SentenceEdge{static_cast<std::uint16_t>(p), static_cast<std::uint16_t>(len), id});
    });
  }
  return edges;
}

bool sample_separation(Engine& rng, std::span<const EventId> E,
                       std::span<const SentenceEdge> edges, std::span<const double> logit,
                       std::vector<std::uint32_t>& out) {
  const std::size_t n = E.size();
  out.clear();
  if (n == 0) return true;
  // f[p * (n+1) + c]: log total weight of covering E[0, p) with c parts.
  const std::size_t W = n + 1;
  thread_local std::vector<double> f, g, w;
  thread_local std::vector<std::size_t> idx;
  f.assign(W * W, kNegInf);
  f[0] = 0.0;
  for (const auto& e : edges) {
    double lw = logit[e.pattern];
    if (lw == kNegInf) continue;
    std::size_t s = e.start, t = e.start + e.length;
    for (std::size_t c = 0; c <= s; ++c) {
      double v = f[s * W + c];
      if (v == kNegInf) continue;
      f[t * W + c + 1] = lse2(f[t * W + c + 1], v + lw);
    }
  }
  g.assign(W, kNegInf);
  for (std::size_t c = 1; c <= n; ++c) {
    double v = f[n * W + c];
    if (v != kNegInf) g[c] = v - std::lgamma(static_cast<double>(c) + 1.0);
  }
  const bool distinct = has_distinct_events(E);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::size_t c = sample_log_categorical(rng, g);
    if (c >= g.size()) return false;
    out.clear();
    std::size_t q = n;
    while (q > 0) {
      w.clear();
      idx.clear();
      for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto& e = edges[k];
        if (static_cast<std::size_t>(e.start + e.length) != q) continue;
        double lw = logit[e.pattern];
        double prev = f[e.start * W + c - 1];
        if (lw == kNegInf || prev == kNegInf) continue;
        w.push_back(prev + lw);
        idx.push_back(k);
      }
      std::size_t pick = sample_log_categorical(rng, w);
      if (pick >= w.size()) throw InvariantViolation("backward pass lost its path");
      const auto& e = edges[idx[pick]];
      out.push_back(e.pattern);
      q = e.start;
      --c;
    }
    std::reverse(out.begin(), out.end());
    if (distinct) return true;
    std::vector<std::uint32_t> sorted = out;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) return true;
  }
  return enumerate_and_sample(rng, n, edges, logit, out);
}

std::vector<double> stick_weights(std::span<const double> V) {
  std::vector<double> v(V.size());
  double rest = 1.0;
  for (std::size_t j = 0; j < V.size(); ++j) {
    v[j] = V[j] * rest;
    rest *= 1.0 - V[j];
  }
  return v;
}

StickBounds stick_bounds(std::size_t j, std::span<const double> V, std::span<const double> u,
                         std::span<const std::size_t> z) {
  StickBounds b;
  double before = 1.0;
  for (std::size_t l = 0; l < j; ++l) before *= 1.0 - V[l];
  double lo = 0.0, over = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] == j) {
      lo = std::max(lo, u[i] / before);
    } else if (z[i] > j) {
      double denom = V[z[i]];
      for (std::size_t l = 0; l < z[i]; ++l)
        if (l != j) denom *= 1.0 - V[l];
      over = std::max(over, u[i] / denom);
    }
  }
  b.lo = lo;
  b.hi = 1.0 - over;
  return b;
}

struct Sampler::Impl {
  struct RecordState {
    std::size_t first = 0;
    std::size_t K = 0;
    std::size_t N = 0;
    double G = 0.0;
  };
  struct SentenceState {
    std::size_t record = 0;
    std::size_t index = 0;
    std::vector<SentenceEdge> edges;
    std::vector<std::uint32_t> parts;
  };
  struct ClassState {
    double V = 0.5;
    double lambda = 1.0;
    std::vector<double> theta;
    std::vector<double> logit;
    double base = 0.0;
  };

  Dataset data;
  FitConfig cfg;
  std::size_t m = 0;

  std::vector<Pattern> reg;
  std::unordered_map<Pattern, std::uint32_t, PatternHash> reg_ids;
  std::vector<char> active;
  std::vector<std::uint32_t> active_ids;
  PatternTrie trie;

  std::vector<RecordState> recs;
  std::vector<SentenceState> sents;

  std::vector<ClassState> cls;
  std::vector<std::size_t> z;
  std::vector<double> u;
  double alpha = 1.0;
  double kappa = 1.0;

  Engine rng;
  std::vector<Engine> rec_rng;

  double tau = 0.1;
  std::size_t add_count = 1;
  double trim_share = 0.0;

  Impl(const Dataset& d, const FitConfig& c) : data(d), cfg(c) {}

  const EventSentence& events_of(const SentenceState& s) const {
    return data.records[s.record].sentences[s.index].events;
  }

  void index_data() {
    m = data.records.size();
    recs.assign(m, RecordState{});
    sents.clear();
    for (std::size_t i = 0; i < m; ++i) {
      const auto& r = data.records[i];
      auto gaps = gaps_from_stamps(r);
      recs[i].first = sents.size();
      recs[i].K = r.sentences.size();
      for (std::size_t k = 0; k < r.sentences.size(); ++k) {
        recs[i].N += gaps[k].size();
        for (double g : gaps[k]) recs[i].G += g;
        SentenceState s;
        s.record = i;
        s.index = k;
        sents.push_back(std::move(s));
      }
    }
  }

  std::uint32_t activate(const Pattern& p) {
    auto it = reg_ids.find(p);
    std::uint32_t id;
    if (it == reg_ids.end()) {
      id = static_cast<std::uint32_t>(reg.size());
      reg.push_back(p);
      reg_ids.emplace(p, id);
      active.push_back(0);
      for (auto& c : cls) {
        c.theta.push_back(0.0);
        c.logit.push_back(kNegInf);
      }
    } else {
      id = it->second;
    }
    if (!active[id]) {
      active[id] = 1;
      active_ids.push_back(id);
    }
    return id;
  }

  void deactivate(std::uint32_t id) {
    active[id] = 0;
    active_ids.erase(std::remove(active_ids.begin(), active_ids.end(), id), active_ids.end());
  }

  void rebuild_trie() {
    std::sort(active_ids.begin(), active_ids.end());
    trie = PatternTrie();
    for (auto id : active_ids) trie.insert(reg[id].view(), id);
  }

  void refresh_edges() {
    for (auto& s : sents) s.edges = sentence_edges(events_of(s), trie);
  }

  void refresh_terms(ClassState& c) const {
    c.base = 0.0;
    for (auto id : active_ids) {
      double t = clamp_theta(c.theta[id]);
      double l1m = std::log1p(-t);
      c.base += l1m;
      c.logit[id] = std::log(t) - l1m;
    }
  }

  void refresh_all_terms() {
    for (auto& c : cls) refresh_terms(c);
  }

  ClassState prior_class(Engine& g) const {
    ClassState c;
    c.V = sample_beta(g, 1.0, alpha);
    c.lambda = sample_gamma(g, 1.0, 1.0);
    c.theta.assign(reg.size(), 0.0);
    c.logit.assign(reg.size(), kNegInf);
    for (auto id : active_ids) c.theta[id] = sample_uniform(g);
    refresh_terms(c);
    return c;
  }

  bool separable(const SentenceState& s) const {
    const auto& E = events_of(s);
    if (has_distinct_events(E)) return true;
    return count_separations(E, trie, 1) > 0;
  }

  // Fewest inactive A2-valid windows that complete a separation of E.
  std::vector<Pattern> covering_windows(const EventSentence& E) const {
    const std::size_t n = E.size();
    std::vector<Pattern> best, cur;
    std::size_t best_cost = std::numeric_limits<std::size_t>::max();
    std::set<std::vector<EventId>> used;
    std::size_t nodes = 0;
    for (std::size_t maxlen = std::min(cfg.max_pattern_length, n); maxlen <= n; ++maxlen) {
      std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t pos, std::size_t cost) {
        if (cost >= best_cost || ++nodes > 200000) return;
        if (pos == n) {
          best_cost = cost;
          best = cur;
          return;
        }
        for (std::size_t l = std::min(maxlen, n - pos); l >= 1; --l) {
          std::span<const EventId> w(E.data() + pos, l);
          if (l > 1 && !has_distinct_events(w)) continue;
          std::vector<EventId> key(w.begin(), w.end());
          if (used.contains(key)) continue;
          auto it = reg_ids.find(Pattern(key));
          bool fresh = it == reg_ids.end() || !active[it->second];
          used.insert(key);
          if (fresh) cur.push_back(Pattern(key));
          dfs(pos + l, cost + (fresh ? 1 : 0));
          if (fresh) cur.pop_back();
          used.erase(key);
        }
      };
      dfs(0, 0);
      if (best_cost != std::numeric_limits<std::size_t>::max()) return best;
      nodes = 0;
    }
    throw UnsegmentableSentence("sentence cannot be split into distinct windows");
  }

  // Adds covering windows for sentences the active dictionary cannot separate.
  void ensure_coverage() {
    bool added = false;
    for (const auto& s : sents) {
      if (separable(s)) continue;
      if (cfg.freeze_dictionary)
        throw UnsegmentableSentence("record " + std::to_string(s.record) + " sentence " +
                                    std::to_string(s.index) + " has no separation");
      for (auto& p : covering_windows(events_of(s))) {
        activate(p);
        added = true;
      }
      rebuild_trie();
    }
    if (added) rebuild_trie();
  }

  void resample_sentence(SentenceState& s) {
    const auto& c = cls[z[s.record]];
    if (!sample_separation(rec_rng[s.record], events_of(s), s.edges, c.logit, s.parts))
      throw UnsegmentableSentence("record " + std::to_string(s.record) + " sentence " +
                                  std::to_string(s.index) + " has no separation");
  }

  void resample_all_sentences() {
    parallel_for(m, cfg.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        for (std::size_t k = 0; k < recs[i].K; ++k) resample_sentence(sents[recs[i].first + k]);
    });
  }

  std::size_t jstar() const {
    std::size_t mx = 0;
    for (auto v : z) mx = std::max(mx, v);
    return mx;
  }

  double separation_term(const SentenceState& s, const ClassState& c) const {
    double v = c.base - std::lgamma(static_cast<double>(s.parts.size()) + 1.0);
    for (auto w : s.parts) v += c.logit[w];
    return v;
  }

  double record_term(std::size_t i, const ClassState& c, bool with_time) const {
    double v = 0.0;
    const auto& r = recs[i];
    for (std::size_t k = 0; k < r.K; ++k) v += separation_term(sents[r.first + k], c);
    if (with_time) v += static_cast<double>(r.N) * std::log(c.lambda) - c.lambda * r.G;
    return v;
  }

  void init_rngs() {
    rng = make_engine(cfg.seed, "gibbs");
    rec_rng.clear();
    rec_rng.reserve(m);
    for (std::size_t i = 0; i < m; ++i) rec_rng.push_back(make_engine(cfg.seed, "gibbs-record", i));
  }

  void initialize() {
    index_data();
    init_rngs();
    Engine init = make_engine(cfg.seed, "init");
    const std::size_t M1 = data.alphabet.size();
    for (std::size_t e = 0; e < M1; ++e) activate(Pattern{static_cast<EventId>(e)});
    for (const auto& p : cfg.initial_patterns) {
      if (p.length() >= 2 && !has_distinct_events(p.view()))
        throw ContractViolation("initial pattern repeats an event");
      for (EventId e : p.events)
        if (e >= M1) throw ContractViolation("initial pattern uses an event outside the alphabet");
      activate(p);
    }
    if (!cfg.freeze_dictionary) {
      std::size_t S0 = cfg.init_count.value_or(M1);
      for (std::size_t l = 2; l <= cfg.max_pattern_length; ++l) {
        std::set<std::vector<EventId>> windows;
        for (const auto& s : sents) {
          const auto& E = events_of(s);
          for (std::size_t p = 0; p + l <= E.size(); ++p) {
            std::span<const EventId> w(E.data() + p, l);
            if (!has_distinct_events(w)) continue;
            std::vector<EventId> key(w.begin(), w.end());
            if (reg_ids.contains(Pattern(key))) continue;
            windows.insert(std::move(key));
          }
        }
        std::vector<std::vector<EventId>> pool(windows.begin(), windows.end());
        std::size_t take = std::min(S0, pool.size());
        for (std::size_t a = 0; a < take; ++a) {
          std::size_t b = a + static_cast<std::size_t>(sample_uniform(init) * (pool.size() - a));
          b = std::min(b, pool.size() - 1);
          std::swap(pool[a], pool[b]);
          activate(Pattern(pool[a]));
        }
      }
    }
    rebuild_trie();
    ensure_coverage();
    refresh_edges();

    alpha = cfg.initial_alpha;
    kappa = sample_exponential(init, 1.0);
    std::size_t J0 = cfg.single_class ? 1 : std::max<std::size_t>(1, cfg.initial_classes);
    cls.clear();
    for (std::size_t j = 0; j < J0; ++j) {
      ClassState c = prior_class(init);
      c.lambda = sample_exponential(init, 1.0);
      cls.push_back(std::move(c));
    }
    if (cfg.single_class) {
      cls[0].V = 1.0;
    } else {
      // pi ~ Dirichlet(1, ..., 1) over the initial classes, written as sticks.
      std::vector<double> g(J0);
      for (auto& x : g) x = sample_gamma(init, 1.0, 1.0);
      double rest = std::accumulate(g.begin(), g.end(), 0.0);
      for (std::size_t j = 0; j < J0; ++j) {
        cls[j].V = std::clamp(g[j] / rest, kThetaMin, kThetaMax);
        rest -= g[j];
      }
      cls[J0 - 1].V = kThetaMax;
    }
    z.assign(m, 0);
    if (!cfg.single_class)
      for (auto& v : z) v = std::min(J0 - 1, static_cast<std::size_t>(sample_uniform(init) * J0));
    u.assign(m, 0.0);
    resample_all_sentences();
  }

  // Step 1.
  void update_slices() {
    auto v = stick_weights(sticks());
    for (std::size_t i = 0; i < m; ++i) u[i] = v[z[i]] * sample_uniform(rec_rng[i]);
  }

  std::vector<double> sticks() const {
    std::vector<double> V(cls.size());
    for (std::size_t j = 0; j < cls.size(); ++j) V[j] = cls[j].V;
    return V;
  }

  // Step 2.
  void update_theta() {
    const std::size_t J = cls.size();
    std::vector<double> n(J, 0.0);
    std::vector<std::vector<double>> c(J, std::vector<double>(reg.size(), 0.0));
    for (const auto& s : sents) {
      std::size_t h = z[s.record];
      n[h] += 1.0;
      for (auto w : s.parts) c[h][w] += 1.0;
    }
    for (std::size_t h = 0; h < J; ++h) {
      for (auto w : active_ids)
        cls[h].theta[w] = clamp_theta(sample_beta(rng, c[h][w] + 1.0, n[h] - c[h][w] + 1.0));
      refresh_terms(cls[h]);
    }
  }

  // Step 3, using gap times.
  void update_lambda() {
    const std::size_t J = cls.size();
    std::vector<double> N(J, 0.0), G(J, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      N[z[i]] += static_cast<double>(recs[i].N);
      G[z[i]] += recs[i].G;
    }
    for (std::size_t j = 0; j < J; ++j) cls[j].lambda = sample_gamma(rng, 1.0 + N[j], 1.0 + G[j]);
  }

  // Step 4.
  void update_sticks() {
    const std::size_t top = jstar();
    for (int attempt = 0;; ++attempt) {
      auto V = sticks();
      bool ok = true;
      for (std::size_t j = 0; j <= top && j < cls.size(); ++j) {
        StickBounds b = stick_bounds(j, V, u, z);
        if (b.lo > b.hi) {
          if (b.lo - b.hi < 1e-12) {
            b.hi = b.lo;
          } else {
            ok = false;
            break;
          }
        }
        V[j] = sample_truncated_beta1(rng, alpha, b.lo, b.hi);
      }
      if (ok) {
        for (std::size_t j = 0; j < cls.size(); ++j) cls[j].V = V[j];
        return;
      }
      if (attempt >= 1) throw InvariantViolation("empty stick truncation interval after retry");
      update_slices();
    }
  }

  // Step 5.
  void update_labels() {
    cls.resize(jstar() + 1);
    double min_u = 1.0;
    for (double x : u) min_u = std::min(min_u, x);
    // Extend until the unassigned stick mass drops below every slice.
    double rest = 1.0;
    for (const auto& c : cls) rest *= 1.0 - c.V;
    while (rest >= min_u) {
      cls.push_back(prior_class(rng));
      rest *= 1.0 - cls.back().V;
      if (cls.size() > 100000) throw InvariantViolation("stick extension does not terminate");
    }
    auto v = stick_weights(sticks());
    const bool with_time = cfg.use_time;
    parallel_for(m, cfg.threads, [&](std::size_t b, std::size_t e) {
      std::vector<double> lw(cls.size());
      for (std::size_t i = b; i < e; ++i) {
        for (std::size_t j = 0; j < cls.size(); ++j)
          lw[j] = v[j] > u[i] ? record_term(i, cls[j], with_time) : kNegInf;
        std::size_t pick = sample_log_categorical(rec_rng[i], lw);
        if (pick >= lw.size()) throw InvariantViolation("record has no admissible class");
        z[i] = pick;
      }
    });
  }

  // Sufficient statistics of a group of records.
  struct Suff {
    std::size_t n = 0;  // sentences
    std::vector<std::uint32_t> c;
    double N = 0.0;
    double G = 0.0;
  };

  std::vector<double> lg_table;  // lgamma(k) for integer k

  double lgi(std::size_t k) {
    if (k >= lg_table.size()) {
      std::size_t old = lg_table.size();
      lg_table.resize(std::max<std::size_t>(2 * k, 1024));
      for (std::size_t x = std::max<std::size_t>(old, 1); x < lg_table.size(); ++x)
        lg_table[x] = std::lgamma(static_cast<double>(x));
    }
    return lg_table[k];
  }

  // log of the Beta(1,1) marginal of c successes in n trials.
  double log_beta_count(std::size_t c, std::size_t n) {
    return lgi(c + 1) + lgi(n - c + 1) - lgi(n + 2);
  }

  double log_marginal(const Suff& s) {
    double v = 0.0;
    for (auto w : active_ids) v += log_beta_count(s.c[w], s.n);
    if (cfg.use_time) v += std::lgamma(s.N + 1.0) - (s.N + 1.0) * std::log1p(s.G);
    return v;
  }

  void add_record(Suff& s, std::size_t i) const {
    const auto& r = recs[i];
    s.n += r.K;
    s.N += static_cast<double>(r.N);
    s.G += r.G;
    for (std::size_t k = 0; k < r.K; ++k)
      for (auto w : sents[r.first + k].parts) ++s.c[w];
  }

  void remove_record(Suff& s, std::size_t i) const {
    const auto& r = recs[i];
    s.n -= r.K;
    s.N -= static_cast<double>(r.N);
    s.G -= r.G;
    for (std::size_t k = 0; k < r.K; ++k)
      for (auto w : sents[r.first + k].parts) --s.c[w];
  }

  // log M(s + i) - log M(s); scratch holds the record's pattern counts.
  double log_predictive(const Suff& s, std::size_t i, std::vector<std::uint32_t>& scratch) {
    const auto& r = recs[i];
    for (std::size_t k = 0; k < r.K; ++k)
      for (auto w : sents[r.first + k].parts) ++scratch[w];
    // Patterns absent from the record only see the extra trials.
    double v = 0.0;
    const std::size_t n1 = s.n + r.K;
    const double shift = lgi(s.n + 2) - lgi(n1 + 2);
    for (auto w : active_ids) {
      const std::size_t c = s.c[w];
      if (scratch[w])
        v += log_beta_count(c + scratch[w], n1) - log_beta_count(c, s.n);
      else
        v += lgi(n1 - c + 1) - lgi(s.n - c + 1) + shift;
    }
    for (std::size_t k = 0; k < r.K; ++k)
      for (auto w : sents[r.first + k].parts) scratch[w] = 0;
    if (cfg.use_time) {
      double N1 = s.N + static_cast<double>(r.N), G1 = s.G + r.G;
      v += std::lgamma(N1 + 1.0) - (N1 + 1.0) * std::log1p(G1) - std::lgamma(s.N + 1.0) +
           (s.N + 1.0) * std::log1p(s.G);
    }
    return v;
  }

  void draw_class_params(std::size_t h) {
    Suff s;
    s.c.assign(reg.size(), 0);
    for (std::size_t i = 0; i < m; ++i)
      if (z[i] == h) add_record(s, i);
    auto& c = cls[h];
    const double n = static_cast<double>(s.n);
    for (auto w : active_ids) {
      const double cw = static_cast<double>(s.c[w]);
      c.theta[w] = clamp_theta(sample_beta(rng, cw + 1.0, n - cw + 1.0));
    }
    refresh_terms(c);
    c.lambda = sample_gamma(rng, 1.0 + s.N, 1.0 + s.G);
  }

  // One restricted Gibbs scan over `rest` between groups A and B. With
  // forced set, the scan moves to that allocation and scores it.
  double restricted_scan(const std::vector<std::size_t>& rest, std::vector<char>& inB, Suff& A,
                         Suff& B, double lvA, double lvB, const std::vector<char>* forced,
                         std::vector<std::uint32_t>& scratch) {
    double log_q = 0.0;
    for (std::size_t r = 0; r < rest.size(); ++r) {
      const std::size_t i = rest[r];
      remove_record(inB[r] ? B : A, i);
      const double pa = lvA + log_predictive(A, i, scratch);
      const double pb = lvB + log_predictive(B, i, scratch);
      const double norm = lse2(pa, pb);
      bool toB = forced ? (*forced)[r] != 0 : std::log(sample_uniform(rng)) < pb - norm;
      log_q += toB ? pb - norm : pa - norm;
      inB[r] = toB ? 1 : 0;
      add_record(toB ? B : A, i);
    }
    return log_q;
  }

  std::size_t split_merge() {
    if (cfg.single_class || m < 2 || cfg.split_merge_attempts == 0) return 0;
    std::size_t accepted = 0;
    const auto v = stick_weights(sticks());
    std::vector<std::uint32_t> scratch(reg.size(), 0);
    for (std::size_t t = 0; t < cfg.split_merge_attempts; ++t) {
      const double md = static_cast<double>(m);
      std::size_t a = std::min(m - 1, static_cast<std::size_t>(sample_uniform(rng) * md));
      std::size_t b = std::min(m - 2, static_cast<std::size_t>(sample_uniform(rng) * (md - 1.0)));
      if (b >= a) ++b;
      const std::size_t ca = z[a], cb = z[b];
      const bool split = ca == cb;
      auto sizes = class_sizes();
      std::vector<std::size_t> empty;
      for (std::size_t h = 0; h < cls.size(); ++h)
        if (!sizes[h]) empty.push_back(h);
      std::size_t lb = cb;
      if (split) {
        if (empty.empty()) continue;
        const double ed = static_cast<double>(empty.size());
        lb = empty[std::min(empty.size() - 1, static_cast<std::size_t>(sample_uniform(rng) * ed))];
      }
      const std::size_t la = ca;
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < m; ++i)
        if (i != a && i != b && (z[i] == ca || z[i] == cb)) rest.push_back(i);

      Suff A, B;
      A.c.assign(reg.size(), 0);
      B.c.assign(reg.size(), 0);
      add_record(A, a);
      add_record(B, b);
      std::vector<char> inB(rest.size(), 0);
      for (std::size_t r = 0; r < rest.size(); ++r) {
        inB[r] = sample_uniform(rng) < 0.5 ? 1 : 0;
        add_record(inB[r] ? B : A, rest[r]);
      }
      const double lvA = std::log(v[la]);
      const double lvB = std::log(v[lb]);
      for (std::size_t k = 0; k < kLaunchScans; ++k)
        restricted_scan(rest, inB, A, B, lvA, lvB, nullptr, scratch);

      double log_q;
      if (split) {
        log_q = restricted_scan(rest, inB, A, B, lvA, lvB, nullptr, scratch);
      } else {
        std::vector<char> current(rest.size(), 0);
        for (std::size_t r = 0; r < rest.size(); ++r) current[r] = z[rest[r]] == cb ? 1 : 0;
        log_q = restricted_scan(rest, inB, A, B, lvA, lvB, &current, scratch);
      }
      std::size_t nB = 1;
      for (char x : inB) nB += x ? 1 : 0;
      const std::size_t nA = rest.size() + 2 - nB;
      Suff U = A;
      add_record(U, b);
      for (std::size_t r = 0; r < rest.size(); ++r)
        if (inB[r]) add_record(U, rest[r]);
      const double split_lp = log_marginal(A) + log_marginal(B) + static_cast<double>(nA) * lvA +
                              static_cast<double>(nB) * lvB;
      const double merged_lp = log_marginal(U) + static_cast<double>(nA + nB) * lvA;

      double log_ratio;
      if (split) {
        log_ratio = split_lp - merged_lp + std::log(static_cast<double>(empty.size())) - log_q;
      } else {
        log_ratio = merged_lp - split_lp - std::log(static_cast<double>(empty.size() + 1)) + log_q;
      }
      if (!(std::log(sample_uniform(rng)) < log_ratio)) continue;

      if (split) {
        z[b] = lb;
        for (std::size_t r = 0; r < rest.size(); ++r) z[rest[r]] = inB[r] ? lb : la;
      } else {
        z[b] = la;
        for (auto i : rest) z[i] = la;
      }
      draw_class_params(la);
      draw_class_params(lb);
      for (std::size_t i = 0; i < m; ++i)
        if (z[i] == la || z[i] == lb) u[i] = v[z[i]] * sample_uniform(rec_rng[i]);
      ++accepted;
    }
    return accepted;
  }

  // Step 6.
  void update_separations() { resample_all_sentences(); }

  // Steps 7 and 8.
  void update_kappa_alpha() {
    double sumK = 0.0;
    for (const auto& r : recs) sumK += static_cast<double>(r.K);
    kappa = sample_gamma(rng, 1.0 + sumK, 1.0 + static_cast<double>(m));
    if (cfg.single_class) return;
    std::size_t top = jstar();
    double s = 0.0;
    for (std::size_t j = 0; j <= top; ++j) s += std::log1p(-std::min(cls[j].V, kThetaMax));
    alpha = sample_gamma(rng, 1.0 + static_cast<double>(top + 1), 1.0 - s);
  }

  void sweep() {
    if (cfg.single_class) {
      update_theta();
      update_lambda();
      update_separations();
      update_kappa_alpha();
      return;
    }
    update_slices();
    update_theta();
    update_lambda();
    update_sticks();
    update_labels();
    update_separations();
    update_kappa_alpha();
  }

  std::vector<std::size_t> class_sizes() const {
    std::vector<std::size_t> n(cls.size(), 0);
    for (auto v : z) ++n[v];
    return n;
  }

  std::size_t search_and_split() {
    auto sizes = class_sizes();
    std::set<std::vector<EventId>> chosen;
    for (std::size_t h = 0; h < cls.size(); ++h) {
      if (!sizes[h]) continue;
      std::vector<const EventSentence*> ptrs;
      for (const auto& s : sents)
        if (z[s.record] == h) ptrs.push_back(&events_of(s));
      for (std::size_t l = 2; l <= cfg.max_pattern_length; ++l) {
        auto top = frequent_lgrams(
            std::span<const EventSentence* const>(ptrs), l,
            [&](const Pattern& p) {
              auto it = reg_ids.find(p);
              return (it != reg_ids.end() && active[it->second]) || chosen.contains(p.events);
            },
            add_count);
        for (auto& pc : top) chosen.insert(pc.pattern.events);
      }
    }
    for (const auto& key : chosen) {
      std::uint32_t id = activate(Pattern(key));
      for (auto& c : cls) c.theta[id] = sample_uniform(rng);
    }
    if (chosen.empty()) return 0;
    rebuild_trie();
    refresh_all_terms();
    refresh_edges();
    resample_all_sentences();
    return chosen.size();
  }

  std::size_t trim_dictionary() {
    auto sizes = class_sizes();
    std::vector<std::size_t> evidence;
    std::size_t largest = 0;
    for (std::size_t h = 0; h < cls.size(); ++h) {
      if (sizes[h] > sizes[largest]) largest = h;
      if (sizes[h] && static_cast<double>(sizes[h]) >= trim_share * static_cast<double>(m))
        evidence.push_back(h);
    }
    if (std::find(evidence.begin(), evidence.end(), largest) == evidence.end())
      evidence.push_back(largest);
    std::vector<std::uint32_t> removed;
    for (auto id : active_ids) {
      if (reg[id].length() == 1) continue;
      double beta = 0.0;
      for (auto h : evidence) beta = std::max(beta, cls[h].theta[id]);
      if (beta < tau) removed.push_back(id);
    }
    if (removed.empty()) return 0;
    for (auto id : removed) deactivate(id);
    rebuild_trie();
    // Keep patterns a sentence cannot do without.
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& s : sents) {
        if (separable(s)) continue;
        for (auto w : s.parts) {
          if (active[w]) continue;
          activate(reg[w]);
          removed.erase(std::remove(removed.begin(), removed.end(), w), removed.end());
          changed = true;
        }
        rebuild_trie();
      }
    }
    if (removed.empty()) return 0;
    refresh_all_terms();
    std::vector<char> gone(reg.size(), 0);
    for (auto id : removed) gone[id] = 1;
    for (auto& s : sents) {
      s.edges = sentence_edges(events_of(s), trie);
      bool hit = std::any_of(s.parts.begin(), s.parts.end(), [&](auto w) { return gone[w] != 0; });
      if (hit) resample_sentence(s);
    }
    return removed.size();
  }

  double complete_log_likelihood() const {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      total += record_term(i, cls[z[i]], cfg.use_time);
      if (!cfg.condition_on_K) total += log_poisson(recs[i].K, kappa);
    }
    return total;
  }
};

Sampler::Sampler(const Dataset& data, const FitConfig& config)
    : impl_(std::make_unique<Impl>(data, config)) {
  validate_dataset(data);
  if (config.max_pattern_length < 1) throw ContractViolation("maximum pattern length must be positive");
  auto& s = *impl_;
  double m = static_cast<double>(data.records.size());
  double thr = m > 0 ? 1.0 / std::sqrt(m) : 1.0;
  s.tau = config.tau.value_or(thr);
  if (!(s.tau > 0.0 && s.tau <= 1.0)) throw ContractViolation("tau must lie in (0,1]");
  s.add_count = config.add_count.value_or(2 * data.alphabet.size());
  s.trim_share = config.trim_min_share.value_or(thr / 2.0);
  s.initialize();
}

Sampler::~Sampler() = default;

void Sampler::update_slices() { impl_->update_slices(); }
void Sampler::update_theta() { impl_->update_theta(); }
void Sampler::update_lambda() { impl_->update_lambda(); }
void Sampler::update_sticks() { impl_->update_sticks(); }
void Sampler::update_labels() { impl_->update_labels(); }
std::size_t Sampler::split_merge() { return impl_->split_merge(); }
void Sampler::update_separations() { impl_->update_separations(); }
void Sampler::update_kappa_alpha() { impl_->update_kappa_alpha(); }
void Sampler::sweep() { impl_->sweep(); }
std::size_t Sampler::search_and_split() { return impl_->search_and_split(); }
std::size_t Sampler::trim_dictionary() { return impl_->trim_dictionary(); }
double Sampler::complete_log_likelihood() const { return impl_->complete_log_likelihood(); }

std::size_t Sampler::records() const { return impl_->m; }
std::size_t Sampler::classes() const { return impl_->cls.size(); }
std::size_t Sampler::max_label() const { return impl_->jstar(); }
std::span<const std::size_t> Sampler::labels() const { return impl_->z; }
std::span<const double> Sampler::slices() const { return impl_->u; }
double Sampler::alpha() const { return impl_->alpha; }
double Sampler::kappa() const { return impl_->kappa; }
double Sampler::lambda(std::size_t j) const { return impl_->cls.at(j).lambda; }
std::vector<std::size_t> Sampler::class_sizes() const { return impl_->class_sizes(); }

std::vector<double> Sampler::sticks() const { return impl_->sticks(); }

double Sampler::theta(std::size_t j, const Pattern& p) const {
  auto it = impl_->reg_ids.find(p);
  if (it == impl_->reg_ids.end() || !impl_->active[it->second]) return 0.0;
  return impl_->cls.at(j).theta[it->second];
}

Dictionary Sampler::dictionary() const {
  Dictionary d;
  auto ids = impl_->active_ids;
  std::sort(ids.begin(), ids.end());
  for (auto id : ids) d.add(impl_->reg[id]);
  return d;
}

std::vector<std::vector<Pattern>> Sampler::current_separations(std::size_t i) const {
  const auto& r = impl_->recs.at(i);
  std::vector<std::vector<Pattern>> out;
  for (std::size_t k = 0; k < r.K; ++k) {
    std::vector<Pattern> parts;
    for (auto w : impl_->sents[r.first + k].parts) parts.push_back(impl_->reg[w]);
    out.push_back(std::move(parts));
  }
  return out;
}

void Sampler::set_labels(std::span<const std::size_t> z) {
  if (z.size() != impl_->m) throw ContractViolation("label vector has the wrong length");
  for (auto v : z)
    if (v >= impl_->cls.size()) throw ContractViolation("label refers to an uninstantiated class");
  impl_->z.assign(z.begin(), z.end());
}

void Sampler::set_sticks(std::span<const double> V) {
  auto& s = *impl_;
  while (s.cls.size() < V.size()) s.cls.push_back(s.prior_class(s.rng));
  for (std::size_t j = 0; j < V.size(); ++j) s.cls[j].V = V[j];
}

void Sampler::set_slices(std::span<const double> u) {
  if (u.size() != impl_->m) throw ContractViolation("slice vector has the wrong length");
  impl_->u.assign(u.begin(), u.end());
}

void Sampler::set_alpha(double a) { impl_->alpha = a; }
void Sampler::set_kappa(double k) { impl_->kappa = k; }
void Sampler::set_lambda(std::size_t j, double value) { impl_->cls.at(j).lambda = value; }

void Sampler::set_theta(std::size_t j, const Pattern& p, double value) {
  auto it = impl_->reg_ids.find(p);
  if (it == impl_->reg_ids.end() || !impl_->active[it->second])
    throw ContractViolation("pattern is not in the current dictionary");
  auto& c = impl_->cls.at(j);
  c.theta[it->second] = clamp_theta(value);
  impl_->refresh_terms(c);
}

void Sampler::replace_data(const Dataset& data,
                           const std::vector<std::vector<std::vector<Pattern>>>& seps) {
  auto& s = *impl_;
  if (data.records.size() != s.m) throw ContractViolation("replacement data changes the record count");
  validate_dataset(data);
  s.data = data;
  s.index_data();
  s.refresh_edges();
  for (auto& st : s.sents) {
    const auto& parts = seps.at(st.record).at(st.index);
    st.parts.clear();
    for (const auto& p : parts) {
      auto it = s.reg_ids.find(p);
      if (it == s.reg_ids.end() || !s.active[it->second])
        throw ContractViolation("separation uses a pattern outside the dictionary");
      st.parts.push_back(it->second);
    }
  }
}

namespace {

// Matches the classes of each retained draw to persistent slots.
class SlotAligner {
 public:
  struct Slot {
    std::vector<double> signature;
    double weight = 0.0;
    double share_sum = 0.0;
    double lambda_sum = 0.0;
    double present = 0.0;
    std::unordered_map<std::uint32_t, std::pair<double, double>> theta;  // sum, count
  };

  std::vector<std::size_t> assign(const std::vector<std::vector<double>>& sigs) {
    const std::size_t k = sigs.size();
    const std::size_t R = slots_.size();
    std::vector<std::size_t> out(k, 0);
    auto cost = [&](std::size_t a, std::size_t r) {
      double c = 0.0;
      for (std::size_t x = 0; x < sigs[a].size(); ++x) c += std::abs(sigs[a][x] - slots_[r].signature[x]);
      return c;
    };
    const std::size_t n = std::max(k, R);
    if (n <= 7 && R > 0) {
      // Slots R..n-1 are new; draw indices k..n-1 are dummies.
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      double best = std::numeric_limits<double>::infinity();
      std::vector<std::size_t> best_perm = perm;
      do {
        double c = 0.0;
        for (std::size_t a = 0; a < k && c < best; ++a)
          if (perm[a] < R) c += cost(a, perm[a]);
        if (c < best) {
          best = c;
          best_perm = perm;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      for (std::size_t a = 0; a < k; ++a) out[a] = best_perm[a];
    } else {
      std::vector<char> used(R, 0);
      std::size_t next = R;
      for (std::size_t a = 0; a < k; ++a) {
        std::size_t pick = R;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < R; ++r) {
          if (used[r]) continue;
          double c = cost(a, r);
          if (c < best) {
            best = c;
            pick = r;
          }
        }
        if (pick == R) {
          out[a] = next++;
        } else {
          used[pick] = 1;
          out[a] = pick;
        }
      }
    }
    // Compact new slot ids so they are consecutive from R.
    std::map<std::size_t, std::size_t> fresh;
    for (auto& o : out) {
      if (o < R) continue;
      auto it = fresh.find(o);
      if (it == fresh.end()) it = fresh.emplace(o, R + fresh.size()).first;
      o = it->second;
    }
    slots_.resize(R + fresh.size());
    for (std::size_t a = 0; a < k; ++a) {
      auto& s = slots_[out[a]];
      if (s.signature.empty()) s.signature.assign(sigs[a].size(), 0.0);
      s.weight += 1.0;
      for (std::size_t x = 0; x < sigs[a].size(); ++x)
        s.signature[x] += (sigs[a][x] - s.signature[x]) / s.weight;
    }
    return out;
  }

  std::vector<Slot>& slots() { return slots_; }

 private:
  std::vector<Slot> slots_;
};

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(17);
  o << x;
  return o.str();
}

}  // namespace

FitResult fit(const Dataset& data, const FitConfig& config) {
  if (data.records.empty()) throw ContractViolation("cannot fit an empty dataset");
  if (config.outer_iterations == 0) throw ContractViolation("outer_iterations must be positive");
  std::size_t burn = config.burn_in.value_or(config.outer_iterations / 2);
  if (burn >= config.outer_iterations) throw ContractViolation("burn-in must be shorter than the run");

  auto outer_step = [&](Sampler& smp) {
    if (!config.freeze_dictionary) smp.search_and_split();
    for (std::size_t k = 0; k < config.inner_sweeps; ++k) smp.sweep();
    if (!config.freeze_dictionary) smp.trim_dictionary();
    smp.split_merge();
  };
  Sampler sampler(data, config);
  auto& s = *sampler.impl_;
  const std::size_t m = s.m;
  const double thr = 1.0 / std::sqrt(static_cast<double>(m));
  const std::size_t M1 = data.alphabet.size();

  FitResult res;
  res.alphabet = data.alphabet;
  res.threshold = thr;
  res.tau = s.tau;
  res.add_count = s.add_count;
  res.init_count = config.init_count.value_or(M1);

  const std::size_t window = std::min(config.consensus_window, config.outer_iterations);
  std::vector<std::size_t> membership(0);
  SlotAligner aligner;
  std::vector<std::map<std::size_t, std::size_t>> record_slots(m);
  double kappa_sum = 0.0;
  std::size_t draws = 0;

  for (std::size_t it = 1; it <= config.outer_iterations; ++it) {
    outer_step(sampler);

    auto sizes = s.class_sizes();
    TracePoint tp;
    tp.iteration = it;
    tp.log_likelihood = s.complete_log_likelihood();
    tp.dictionary_size = s.active_ids.size();
    tp.alpha = s.alpha;
    for (auto n : sizes) {
      if (n) ++tp.occupied_classes;
      if (static_cast<double>(n) / static_cast<double>(m) > thr) ++tp.large_classes;
    }
    res.trace.push_back(tp);

    if (it + window > config.outer_iterations) {
      membership.resize(s.reg.size(), 0);
      for (auto id : s.active_ids) ++membership[id];
    }

    if (it <= burn) continue;
    ++draws;
    kappa_sum += s.kappa;
    std::vector<std::size_t> occ;
    for (std::size_t h = 0; h < sizes.size(); ++h)
      if (sizes[h]) occ.push_back(h);
    std::stable_sort(occ.begin(), occ.end(), [&](auto a, auto b) { return sizes[a] > sizes[b]; });
    std::vector<std::vector<double>> sigs;
    for (auto h : occ) {
      std::vector<double> sig;
      for (std::size_t e = 0; e < M1; ++e) sig.push_back(s.cls[h].theta[e]);
      if (config.use_time) sig.push_back(std::log(s.cls[h].lambda));
      sigs.push_back(std::move(sig));
    }
    auto slot_of = aligner.assign(sigs);
    Draw dr;
    dr.iteration = it;
    dr.kappa = s.kappa;
    std::vector<std::size_t> class_slot(s.cls.size(), 0);
    for (std::size_t a = 0; a < occ.size(); ++a) {
      auto h = occ[a];
      class_slot[h] = slot_of[a];
      auto& slot = aligner.slots()[slot_of[a]];
      double share = static_cast<double>(sizes[h]) / static_cast<double>(m);
      slot.share_sum += share;
      slot.lambda_sum += s.cls[h].lambda;
      slot.present += 1.0;
      for (auto id : s.active_ids) {
        auto& acc = slot.theta[id];
        acc.first += s.cls[h].theta[id];
        acc.second += 1.0;
      }
      dr.classes.push_back(DrawClass{slot_of[a], share, s.cls[h].lambda});
    }
    for (std::size_t i = 0; i < m; ++i) ++record_slots[i][class_slot[s.z[i]]];
    if (config.keep_draws) res.draws.push_back(std::move(dr));
  }
  res.retained_draws = draws;

  // Consensus dictionary: 1-grams first, then by length and content.
  std::vector<std::uint32_t> keep;
  for (std::uint32_t id = 0; id < membership.size(); ++id)
    if (2 * membership[id] >= window) keep.push_back(id);
  for (std::uint32_t id = 0; id < s.reg.size(); ++id)
    if (s.reg[id].length() == 1 && (id >= membership.size() || 2 * membership[id] < window))
      keep.push_back(id);
  std::sort(keep.begin(), keep.end(), [&](auto a, auto b) {
    const auto& pa = s.reg[a];
    const auto& pb = s.reg[b];
    if (pa.length() != pb.length()) return pa.length() < pb.length();
    return pa.events < pb.events;
  });
  for (auto id : keep) res.dictionary.add(s.reg[id]);

  auto& slots = aligner.slots();
  std::vector<double> pi_hat(slots.size());
  for (std::size_t r = 0; r < slots.size(); ++r) pi_hat[r] = slots[r].share_sum / static_cast<double>(draws);
  std::vector<std::size_t> order(slots.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pi_hat[a] > pi_hat[b]; });
  std::vector<std::size_t> reported;
  for (auto r : order)
    if (pi_hat[r] > thr) reported.push_back(r);
  res.J_star = reported.size();
  if (reported.empty() && !order.empty()) reported.push_back(order.front());

  double total = 0.0;
  for (auto r : reported) total += pi_hat[r];
  std::vector<int> slot_to_class(slots.size(), -1);
  for (std::size_t c = 0; c < reported.size(); ++c) {
    auto r = reported[c];
    slot_to_class[r] = static_cast<int>(c);
    res.params.pi.push_back(pi_hat[r] / total);
    res.raw_share.push_back(pi_hat[r]);
    res.params.lambda.push_back(slots[r].lambda_sum / slots[r].present);
    std::vector<double> row;
    for (auto id : keep) {
      auto it = slots[r].theta.find(id);
      row.push_back(it == slots[r].theta.end() || it->second.second == 0.0
                        ? 0.0
                        : it->second.first / it->second.second);
    }
    res.params.theta.push_back(std::move(row));
  }
  res.params.kappa = kappa_sum / static_cast<double>(draws);

  res.modal_class.assign(m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t best = 0, best_n = 0;
    for (auto [slot, n] : record_slots[i])
      if (n > best_n) {
        best = slot;
        best_n = n;
      }
    if (best_n) res.modal_class[i] = slot_to_class[best];
  }

  std::vector<double> post;
  for (const auto& tp : res.trace)
    if (tp.iteration > burn) post.push_back(tp.log_likelihood);
  std::size_t half = post.size() / 2;
  auto mean = [](auto b, auto e) {
    double n = static_cast<double>(std::distance(b, e));
    return n > 0 ? std::accumulate(b, e, 0.0) / n : 0.0;
  };
  res.first_half_mean = mean(post.begin(), post.begin() + static_cast<std::ptrdiff_t>(half));
  res.second_half_mean = mean(post.begin() + static_cast<std::ptrdiff_t>(half), post.end());
  return res;
}

nlohmann::json fit_result_to_json(const FitResult& r) {
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t c = 0; c < r.params.pi.size(); ++c) {
    classes.push_back({{"pi", r.params.pi[c]},
                       {"share", r.raw_share[c]},
                       {"lambda", r.params.lambda[c]},
                       {"theta", r.params.theta[c]}});
  }
  return {{"alphabet", r.alphabet},
          {"dictionary", dictionary_to_json(r.dictionary, r.alphabet)},
          {"J_star", r.J_star},
          {"threshold", r.threshold},
          {"tau", r.tau},
          {"add_count", r.add_count},
          {"init_count", r.init_count},
          {"kappa", r.params.kappa},
          {"classes", std::move(classes)},
          {"modal_class", r.modal_class},
          {"retained_draws", r.retained_draws},
          {"trace_summary",
           {{"iterations", r.trace.size()},
            {"first_half_mean_loglik", r.first_half_mean},
            {"second_half_mean_loglik", r.second_half_mean},
            {"final_dictionary_size", r.trace.empty() ? 0 : r.trace.back().dictionary_size}}}};
}

FitResult fit_result_from_json(const nlohmann::json& j) {
  FitResult r;
  try {
    r.alphabet = j.at("alphabet").get<std::vector<std::string>>();
    r.dictionary = dictionary_from_json(j.at("dictionary"), r.alphabet);
    r.J_star = j.at("J_star").get<std::size_t>();
    r.threshold = j.value("threshold", 0.0);
    r.tau = j.value("tau", 0.0);
    r.add_count = j.value("add_count", std::size_t{0});
    r.init_count = j.value("init_count", std::size_t{0});
    if (j.contains("trace_summary")) {
      const auto& t = j.at("trace_summary");
      r.first_half_mean = t.value("first_half_mean_loglik", 0.0);
      r.second_half_mean = t.value("second_half_mean_loglik", 0.0);
    }
    r.params.kappa = j.at("kappa").get<double>();
    for (const auto& c : j.at("classes")) {
      r.params.pi.push_back(c.at("pi").get<double>());
      r.raw_share.push_back(c.value("share", c.at("pi").get<double>()));
      r.params.lambda.push_back(c.at("lambda").get<double>());
      r.params.theta.push_back(c.at("theta").get<std::vector<double>>());
    }
    r.modal_class = j.value("modal_class", std::vector<int>{});
    r.retained_draws = j.value("retained_draws", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRecord(std::string("fit result schema: ") + e.what());
  }
  return r;
}

std::string trace_to_csv(const FitResult& r) {
  std::string out = "iteration,log_likelihood,dictionary_size,occupied_classes,large_classes,alpha\n";
  for (const auto& t : r.trace) {
    out += std::to_string(t.iteration) + "," + fmt(t.log_likelihood) + "," +
           std::to_string(t.dictionary_size) + "," + std::to_string(t.occupied_classes) + "," +
           std::to_string(t.large_classes) + "," + fmt(t.alpha) + "\n";
  }
  return out;
}

std::string draws_to_csv(const FitResult& r) {
  std::string out = "iteration,block,slot,value\n";
  for (const auto& d : r.draws) {
    out += std::to_string(d.iteration) + ",kappa,," + fmt(d.kappa) + "\n";
    for (const auto& c : d.classes) {
      out += std::to_string(d.iteration) + ",share," + std::to_string(c.slot) + "," + fmt(c.share) + "\n";
      out += std::to_string(d.iteration) + ",lambda," + std::to_string(c.slot) + "," + fmt(c.lambda) + "\n";
    }
  }
  return out;
}

}  // namespace ltdm
