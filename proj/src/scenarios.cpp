#include "metricslim/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "metricslim/dataset.hpp"
#include "metricslim/error.hpp"
#include "metricslim/features.hpp"

namespace metricslim {

const char* to_string(ScenarioKind kind) noexcept {
  switch (kind) {
    case ScenarioKind::WpdpNearest: return "wpdp_nearest";
    case ScenarioKind::WpdpAllHistory: return "wpdp_all_history";
    case ScenarioKind::CpdpExhaustive: return "cpdp_exhaustive";
  }
  return "?";
}

ScenarioKind parse_scenario_kind(const std::string& name) {
  for (auto k : {ScenarioKind::WpdpNearest, ScenarioKind::WpdpAllHistory, ScenarioKind::CpdpExhaustive}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown scenario '" + name + "'");
}

std::vector<PredictionTask> build_tasks(const Corpus& corpus, const ScenarioSpec& spec) {
  if (spec.cpdp_max_releases < 1) {
    throw Error(ErrorKind::InvalidArgument, "cpdp_max_releases must be >= 1");
  }
  std::vector<PredictionTask> tasks;
  for (std::size_t t = 0; t < corpus.size(); ++t) {
    const auto siblings = corpus.releases_of(corpus[t].project());
    const auto rank = corpus.version_rank(t);
    if (rank == 0) continue;
    PredictionTask task;
    task.target = t;
    task.kind = spec.kind;
    switch (spec.kind) {
      case ScenarioKind::WpdpNearest:
        task.training = {siblings[rank - 1]};
        break;
      case ScenarioKind::WpdpAllHistory:
        task.training.assign(siblings.begin(), siblings.begin() + static_cast<std::ptrdiff_t>(rank));
        break;
      case ScenarioKind::CpdpExhaustive:
        for (std::size_t i = 0; i < corpus.size(); ++i) {
          if (corpus[i].project() != corpus[t].project()) task.candidates.push_back(i);
        }
        break;
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::size_t cpdp_combination_count(std::size_t candidates, int max_releases) {
  std::size_t total = 0;
  std::size_t binom = 1;
  for (int k = 1; k <= max_releases && static_cast<std::size_t>(k) <= candidates; ++k) {
    binom = binom * (candidates - static_cast<std::size_t>(k) + 1) / static_cast<std::size_t>(k);
    total += binom;
  }
  return total;
}

void for_each_combination(const std::vector<std::size_t>& pool, int max_releases,
                          const std::function<void(const std::vector<std::size_t>&)>& visit) {
  const std::size_t n = pool.size();
  for (std::size_t k = 1; k <= static_cast<std::size_t>(max_releases) && k <= n; ++k) {
    std::vector<std::size_t> pos(k);
    for (std::size_t i = 0; i < k; ++i) pos[i] = i;
    std::vector<std::size_t> combo(k);
    while (true) {
      for (std::size_t i = 0; i < k; ++i) combo[i] = pool[pos[i]];
      visit(combo);
      std::size_t i = k;
      while (i > 0 && pos[i - 1] == n - k + (i - 1)) --i;
      if (i == 0) break;
      ++pos[i - 1];
      for (std::size_t j = i; j < k; ++j) pos[j] = pos[j - 1] + 1;
    }
  }
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const auto n_threads = static_cast<std::size_t>(std::max(1, workers));
  if (n_threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(n_threads, count); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::vector<std::string> release_names(const Corpus& corpus, const std::vector<std::size_t>& ids) {
  std::vector<std::string> out;
  for (auto i : ids) out.push_back(corpus[i].name());
  return out;
}

void fill_outcome(ResultRow& row, const Outcome& o) {
  row.outcome = o;
  row.measures = measures(o);
  try {
    row.consistency = consistency(o);
  } catch (const Error& e) {
    row.note = e.what();
  }
}

// Per-training-set subsets, computed at most once per metric set.
class SubsetResolver {
 public:
  SubsetResolver(const std::vector<MetricSet>& sets, const Dataset& training, int bins)
      : sets_(sets), training_(training), bins_(bins), cache_(sets.size()), error_(sets.size()) {}

  std::optional<FeatureSubset> get(std::size_t m) {
    if (sets_[m].selector == SelectorKind::Fixed) return sets_[m].fixed;
    if (!cache_[m] && error_[m].empty()) {
      try {
        cache_[m] = select_features(sets_[m], training_, bins_);
      } catch (const Error& e) {
        error_[m] = e.what();
      }
    }
    return cache_[m];
  }
  const std::string& error(std::size_t m) const { return error_[m]; }

 private:
  const std::vector<MetricSet>& sets_;
  const Dataset& training_;
  int bins_;
  std::vector<std::optional<FeatureSubset>> cache_;
  std::vector<std::string> error_;
};

void check_no_leak(const PredictionTask& task) {
  if (std::find(task.training.begin(), task.training.end(), task.target) != task.training.end()) {
    throw std::logic_error("training data contains the target release");
  }
}

}  // namespace

FeatureSubset select_features(const MetricSet& set, const Dataset& training, int cfs_bins) {
  switch (set.selector) {
    case SelectorKind::Fixed: return set.fixed;
    case SelectorKind::Filter: return greedy_stepwise_cfs(training, cfs_bins);
    case SelectorKind::MaxRel: return max_rel(training, set.k, cfs_bins);
    case SelectorKind::Mrmr: return mrmr(training, set.k, cfs_bins);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown selector");
}

CpdpResult exhaustive_cpdp(const Corpus& corpus, std::size_t target, const ScenarioSpec& spec,
                           const ClassifierSpec& classifier, const MetricSet& metric_set,
                           int cfs_bins) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].project() != corpus[target].project()) candidates.push_back(i);
  }
  if (candidates.empty()) {
    throw Error(ErrorKind::NoTrainingData, corpus[target].name() + ": no foreign releases");
  }
  const auto test = make_dataset(corpus[target]);
  CpdpResult best;
  bool have = false;
  for_each_combination(candidates, spec.cpdp_max_releases, [&](const std::vector<std::size_t>& combo) {
    const auto training = make_dataset(corpus, combo);
    const std::vector<MetricSet> sets{metric_set};
    SubsetResolver resolver(sets, training, cfs_bins);
    const auto subset = resolver.get(0);
    if (!subset) {
      ++best.skipped;
      return;
    }
    try {
      const auto model = train(classifier, training, *subset);
      const auto outcome = evaluate_on(model, test);
      const double objective = select(measures(outcome), spec.cpdp_objective);
      ++best.evaluated;
      if (!have || objective > best.objective) {
        have = true;
        best.combination = combo;
        best.outcome = outcome;
        best.objective = objective;
        best.subset = *subset;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingleClassData) throw;
      ++best.skipped;
    }
  });
  return best;
}

namespace {

struct CellKey {
  std::size_t target_slot;
  std::size_t classifier;
  std::size_t metric_set;
};

class CpdpGrid {
 public:
  CpdpGrid(const Corpus& corpus, const std::vector<std::size_t>& targets, const ScenarioSpec& spec,
           const std::vector<ClassifierSpec>& classifiers, const std::vector<MetricSet>& sets,
           const GridOptions& options)
      : corpus_(corpus), targets_(targets), spec_(spec), classifiers_(classifiers), sets_(sets),
        options_(options),
        best_(targets.size() * classifiers.size() * sets.size()) {
    // All targets stacked once, so each model scores them in one pass.
    tests_ = make_dataset(corpus_, targets_);
    offsets_.push_back(0);
    for (auto t : targets_) offsets_.push_back(offsets_.back() + static_cast<Eigen::Index>(corpus_[t].size()));
  }

  void run() {
    std::vector<std::size_t> pool(corpus_.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    std::vector<std::vector<std::size_t>> chunk;
    constexpr std::size_t kChunk = 256;
    std::size_t done = 0;
    auto flush = [&] {
      std::vector<std::vector<Entry>> results(chunk.size());
      parallel_for(chunk.size(), options_.workers,
                   [&](std::size_t i) { results[i] = evaluate(chunk[i]); });
      for (std::size_t i = 0; i < chunk.size(); ++i) fold(chunk[i], results[i]);
      done += chunk.size();
      if (options_.progress) {
        options_.progress("cpdp " + std::string(to_string(spec_.kind)) + ": " +
                          std::to_string(done) + " combinations");
      }
      chunk.clear();
    };
    for_each_combination(pool, spec_.cpdp_max_releases, [&](const std::vector<std::size_t>& combo) {
      if (eligible(combo).empty()) return;
      chunk.push_back(combo);
      if (chunk.size() == kChunk) flush();
    });
    if (!chunk.empty()) flush();
  }

  const CpdpResult& best(const CellKey& k) const { return best_[index(k)]; }

 private:
  struct Entry {
    CellKey key;
    bool skipped = false;
    Outcome outcome;
    double objective = 0.0;
    FeatureSubset subset;
  };

  std::size_t index(const CellKey& k) const {
    return (k.target_slot * classifiers_.size() + k.classifier) * sets_.size() + k.metric_set;
  }

  std::vector<std::size_t> eligible(const std::vector<std::size_t>& combo) const {
    std::vector<std::size_t> slots;
    for (std::size_t s = 0; s < targets_.size(); ++s) {
      const auto& project = corpus_[targets_[s]].project();
      const bool clash = std::any_of(combo.begin(), combo.end(),
                                     [&](std::size_t r) { return corpus_[r].project() == project; });
      if (!clash) slots.push_back(s);
    }
    return slots;
  }

  std::vector<Entry> evaluate(const std::vector<std::size_t>& combo) const {
    const auto slots = eligible(combo);
    const auto training = make_dataset(corpus_, combo);
    SubsetResolver resolver(sets_, training, options_.cfs_bins);
    std::vector<Entry> out;
    for (std::size_t m = 0; m < sets_.size(); ++m) {
      const auto subset = resolver.get(m);
      for (std::size_t c = 0; c < classifiers_.size(); ++c) {
        std::optional<Model> model;
        if (subset) {
          try {
            model = train(classifiers_[c], training, *subset);
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::SingleClassData) throw;
          }
        }
        Eigen::VectorXd scores;
        if (model) scores = predict_scores(*model, tests_.features);
        for (auto s : slots) {
          Entry e{{s, c, m}, !model.has_value(), {}, 0.0, subset.value_or(FeatureSubset{})};
          if (model) {
            const auto begin = offsets_[s];
            const auto len = offsets_[s + 1] - begin;
            e.outcome = tally_predictions(scores.segment(begin, len), tests_.labels.segment(begin, len));
            e.objective = select(measures(e.outcome), spec_.cpdp_objective);
          }
          out.push_back(e);
        }
      }
    }
    return out;
  }

  void fold(const std::vector<std::size_t>& combo, const std::vector<Entry>& entries) {
    for (const auto& e : entries) {
      auto& b = best_[index(e.key)];
      if (e.skipped) {
        ++b.skipped;
        continue;
      }
      const bool first = b.evaluated == 0;
      ++b.evaluated;
      if (first || e.objective > b.objective) {
        b.combination = combo;
        b.outcome = e.outcome;
        b.objective = e.objective;
        b.subset = e.subset;
      }
    }
  }

  const Corpus& corpus_;
  const std::vector<std::size_t>& targets_;
  ScenarioSpec spec_;
  const std::vector<ClassifierSpec>& classifiers_;
  const std::vector<MetricSet>& sets_;
  const GridOptions& options_;
  Dataset tests_;
  std::vector<Eigen::Index> offsets_;
  std::vector<CpdpResult> best_;
};

}  // namespace

ResultTable run_grid(const Corpus& corpus, const std::vector<ScenarioSpec>& scenarios,
                     const std::vector<ClassifierSpec>& classifiers,
                     const std::vector<MetricSet>& metric_sets, const GridOptions& options) {
  std::vector<std::size_t> targets;
  for (std::size_t t = 0; t < corpus.size(); ++t) {
    if (corpus.version_rank(t) > 0) targets.push_back(t);
  }
  const std::size_t S = scenarios.size(), C = classifiers.size(), M = metric_sets.size();
  ResultTable table;
  table.rows.resize(targets.size() * S * C * M);
  auto slot = [&](std::size_t t, std::size_t s, std::size_t c, std::size_t m) -> ResultRow& {
    return table.rows[((t * S + s) * C + c) * M + m];
  };
  auto label = [&](ResultRow& row, std::size_t t, std::size_t s, std::size_t c, std::size_t m) {
    row.target = corpus[targets[t]].name();
    row.scenario = to_string(scenarios[s].kind);
    row.classifier = classifiers[c].name();
    row.metric_set = metric_sets[m].name;
  };

  for (std::size_t s = 0; s < S; ++s) {
    const auto& spec = scenarios[s];
    const auto tasks = build_tasks(corpus, spec);
    if (spec.kind != ScenarioKind::CpdpExhaustive) {
      parallel_for(tasks.size(), options.workers, [&](std::size_t t) {
        const auto& task = tasks[t];
        check_no_leak(task);
        const auto training = make_dataset(corpus, task.training);
        const auto test = make_dataset(corpus[task.target]);
        SubsetResolver resolver(metric_sets, training, options.cfs_bins);
        for (std::size_t m = 0; m < M; ++m) {
          const auto subset = resolver.get(m);
          const auto& subset_error = resolver.error(m);
          for (std::size_t c = 0; c < C; ++c) {
            auto& row = slot(t, s, c, m);
            label(row, t, s, c, m);
            row.training = release_names(corpus, task.training);
            if (!subset) {
              row.error = subset_error;
              continue;
            }
            row.subset = subset->to_string();
            try {
              const auto model = train(classifiers[c], training, *subset);
              fill_outcome(row, evaluate_on(model, test));
            } catch (const Error& e) {
              row.error = e.what();
            }
          }
        }
      });
      if (options.progress) options.progress(std::string(to_string(spec.kind)) + " done");
      continue;
    }

    CpdpGrid grid(corpus, targets, spec, classifiers, metric_sets, options);
    grid.run();
    for (std::size_t t = 0; t < targets.size(); ++t) {
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t m = 0; m < M; ++m) {
          auto& row = slot(t, s, c, m);
          label(row, t, s, c, m);
          const auto& best = grid.best({t, c, m});
          row.objective = to_string(spec.cpdp_objective);
          row.target_leak = true;
          if (best.evaluated == 0) {
            row.error = "NoTrainingData: no trainable cross-project combination";
            continue;
          }
          PredictionTask task{targets[t], best.combination, {}, spec.kind};
          check_no_leak(task);
          row.training = release_names(corpus, best.combination);
          row.subset = best.subset.to_string();
          fill_outcome(row, best.outcome);
          const std::string counts = "combinations evaluated " + std::to_string(best.evaluated) +
                                     ", skipped " + std::to_string(best.skipped);
          row.note = row.note.empty() ? counts : row.note + "; " + counts;
        }
      }
    }
  }
  return table;
}

}  // namespace metricslim
