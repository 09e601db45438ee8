#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "metricslim/config.hpp"
#include "metricslim/corpus.hpp"
#include "metricslim/error.hpp"
#include "metricslim/report.hpp"

namespace ml = metricslim;

namespace {

struct Overrides {
  std::string config;
  std::string manifest;
  std::string out;
  std::string k;
  std::optional<double> phi;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  bool lenient = false;
};

void add_common(CLI::App* cmd, Overrides& o, bool needs_out) {
  cmd->add_option("--config", o.config, "run configuration (JSON)");
  cmd->add_option("--manifest", o.manifest, "corpus manifest, instead of --config");
  if (needs_out) cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--k", o.k, "Top-k size, or 'auto' for the coverage peak");
  cmd->add_option("--phi", o.phi, "strong-correlation threshold in (0, 1)");
  cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::Range(1, 1024));
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_flag("--lenient", o.lenient, "ignore unknown CSV columns");
}

ml::RunConfig effective_config(const Overrides& o) {
  ml::RunConfig cfg;
  if (!o.config.empty()) {
    cfg = ml::load_run_config(o.config);
  } else if (!o.manifest.empty()) {
    cfg = ml::run_config_for_manifest(o.manifest);
  } else {
    throw ml::Error(ml::ErrorKind::ConfigError, "either --config or --manifest is required");
  }
  if (!o.out.empty()) cfg.out = o.out;
  if (!o.k.empty()) {
    if (o.k == "auto") {
      cfg.k.reset();
    } else {
      std::size_t pos = 0;
      unsigned long v = 0;
      try {
        v = std::stoul(o.k, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != o.k.size() || v < 1 || v > ml::kMetricCount) {
        throw ml::Error(ml::ErrorKind::ConfigError, "--k: expected an integer in [1, 20] or 'auto'");
      }
      cfg.k = v;
    }
  }
  if (o.phi) {
    if (!(*o.phi > 0.0 && *o.phi < 1.0)) throw ml::Error(ml::ErrorKind::ConfigError, "--phi: must be in (0, 1)");
    cfg.phi = *o.phi;
  }
  if (o.workers) cfg.workers = *o.workers;
  if (o.seed) cfg.override_seed(*o.seed);
  if (o.lenient) cfg.lenient = true;
  return cfg;
}

ml::Corpus load(const ml::RunConfig& cfg) {
  ml::LoadOptions opts;
  opts.parse.lenient = cfg.lenient;
  return ml::load_corpus(cfg.manifest, opts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Defect-prediction metric-set simplification toolkit"};
  app.set_version_flag("--version", std::string(ml::toolkit_version()));
  app.require_subcommand(1);

  Overrides o;
  auto* run = app.add_subcommand("run", "run the full grid and write every artifact");
  add_common(run, o, true);
  std::string report_dir;
  auto* report = app.add_subcommand("report", "render report.md and plot data from a run directory");
  report->add_option("dir", report_dir, "run output directory");
  report->add_option("--out", report_dir, "run output directory");
  auto* summary = app.add_subcommand("summary", "per-release instance and defect counts");
  add_common(summary, o, false);
  auto* select = app.add_subcommand("select", "per-release FILTER subsets");
  add_common(select, o, false);
  auto* topk = app.add_subcommand("topk", "occurrence tally and coverage curve");
  add_common(topk, o, false);
  auto* minimize = app.add_subcommand("minimize", "correlation matrix, strong pairs and combination ranking");
  add_common(minimize, o, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return ml::cmd_run(effective_config(o), std::cerr);
    if (report->parsed()) {
      if (report_dir.empty()) throw ml::Error(ml::ErrorKind::ConfigError, "report: a run directory is required");
      std::cout << ml::cmd_report(report_dir);
      return 0;
    }
    const auto cfg = effective_config(o);
    const auto corpus = load(cfg);
    if (summary->parsed()) {
      std::cout << ml::render_summary(ml::corpus_summary(corpus));
    } else if (select->parsed()) {
      std::cout << ml::render_filters(corpus, ml::select_filters(corpus, cfg.cfs_bins, cfg.workers));
    } else {
      const auto simp = ml::simplify_corpus(corpus, cfg, cfg.k, cfg.phi);
      std::cout << (topk->parsed() ? ml::render_topk(simp) : ml::render_minimize(simp, cfg.phi));
    }
    return 0;
  } catch (const ml::Error& e) {
    std::cerr << "metricslim: " << e.what() << "\n";
    return e.kind() == ml::ErrorKind::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "metricslim: " << e.what() << "\n";
    return 1;
  }
}
