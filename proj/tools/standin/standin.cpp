#include "standin.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "metricslim/error.hpp"
#include "metricslim/random.hpp"

namespace metricslim::standin {

namespace fs = std::filesystem;

const std::vector<ReleaseShape>& promise_shapes() {
  static const std::vector<ReleaseShape> shapes = {
      {"ant", "1.3", 125, 20},      {"ant", "1.4", 178, 40},      {"ant", "1.5", 293, 32},
      {"ant", "1.6", 351, 92},      {"ant", "1.7", 745, 166},     {"camel", "1.0", 339, 13},
      {"camel", "1.2", 608, 216},   {"camel", "1.4", 872, 145},   {"camel", "1.6", 965, 188},
      {"ivy", "1.1", 111, 63},      {"ivy", "1.4", 241, 16},      {"ivy", "2.0", 352, 40},
      {"jedit", "3.2", 272, 90},    {"jedit", "4.0", 306, 75},    {"lucene", "2.0", 195, 91},
      {"lucene", "2.2", 247, 144},  {"lucene", "2.4", 340, 203},  {"poi", "1.5", 237, 141},
      {"poi", "2.0", 314, 37},      {"poi", "2.5", 385, 248},     {"poi", "3.0", 442, 281},
      {"synapse", "1.0", 157, 16},  {"synapse", "1.1", 222, 60},  {"synapse", "1.2", 256, 86},
      {"velocity", "1.4", 196, 147}, {"velocity", "1.5", 214, 142}, {"velocity", "1.6", 229, 78},
      {"xalan", "2.4", 723, 110},   {"xalan", "2.5", 803, 387},   {"xalan", "2.6", 885, 411},
      {"xerces", "init", 162, 77},  {"xerces", "1.2", 440, 71},   {"xerces", "1.3", 453, 69},
      {"xerces", "1.4", 588, 437},
  };
  return shapes;
}

namespace {

std::uint64_t hash_name(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

double round_to(double v, double step) { return std::round(v / step) * step; }

}  // namespace

std::string make_release_csv(const ReleaseShape& shape, std::uint64_t seed) {
  if (shape.instances == 0 || shape.defective > shape.instances) {
    throw Error(ErrorKind::InvalidArgument, "bad release shape " + shape.project + "-" + shape.version);
  }
  // Project-level offsets keep releases of one project closer to each other
  // than to foreign ones.
  Rng project_rng(hash_name(shape.project) ^ seed);
  const double size_shift = 0.4 * project_rng.normal();
  const double coupling_shift = 0.4 * project_rng.normal();
  Rng rng(hash_name(shape.project + "-" + shape.version) ^ (seed * 0x9E3779B97F4A7C15ull));

  const std::size_t n = shape.instances;
  struct Row {
    double m[20];
    double score;
  };
  std::vector<Row> rows(n);
  for (auto& r : rows) {
    const double s = rng.normal() + size_shift;      // size
    const double c = rng.normal() + coupling_shift;  // coupling
    const double h = rng.normal();                   // cohesion
    const double inh = rng.normal();                 // inheritance
    auto e = [&] { return rng.normal(); };
    auto count = [](double x) { return std::floor(std::max(0.0, x)); };

    const double wmc = count(std::exp(2.0 + 0.75 * s + 0.45 * e()));
    const double dit = count(1.0 + std::exp(0.2 + 0.6 * inh + 0.3 * e()) - 0.5);
    const double noc = count(std::exp(-1.2 + 0.5 * inh + 0.9 * e()) - 0.3);
    const double cbo = count(std::exp(1.8 + 0.75 * c + 0.3 * s + 0.45 * e()));
    const double rfc = count(std::exp(3.0 + 0.8 * s + 0.35 * c + 0.3 * e()));
    const double lcom = count(std::exp(2.0 + 0.9 * s + 0.6 * h + 0.8 * e()) - 1.0);
    const double ca = count(std::exp(1.0 + 0.5 * c + 0.9 * e()) - 0.5);
    const double ce = count(std::exp(1.5 + 0.8 * c + 0.25 * s + 0.45 * e()));
    const double npm = count(std::exp(1.6 + 0.6 * s + 0.6 * e()));
    const double lcom3 = round_to(2.0 / (1.0 + std::exp(-(0.4 * h + 0.8 * e()))), 1e-4);
    const double loc = count(std::exp(4.5 + 1.0 * s + 0.35 * e()));
    const double dam = round_to(1.0 / (1.0 + std::exp(-(1.0 + e()))), 1e-4);
    const double moa = count(std::exp(-0.5 + 0.4 * s + 0.9 * e()) - 0.4);
    const double mfa = dit > 1.0 ? round_to(1.0 / (1.0 + std::exp(-(0.3 * inh + e()))), 1e-4) : 0.0;
    const double cam = round_to(1.0 / (1.0 + std::exp(0.5 * s + 0.6 * e())), 1e-4);
    const double ic = count(0.6 * inh + 0.8 * e());
    const double cbm = count(ic + 0.7 * e());
    const double amc = round_to(std::exp(2.2 + 0.35 * s + 0.5 * e()), 1e-4);
    const double max_cc = count(std::exp(0.9 + 0.45 * s + 0.5 * e()));
    const double avg_cc = round_to(std::max(0.0, std::exp(0.2 + 0.2 * s + 0.4 * e()) - 0.2), 1e-4);
    const double vals[20] = {wmc, dit, noc, cbo, rfc, lcom, ca, ce, npm, lcom3,
                             loc, dam, moa, mfa, cam, ic,  cbm, amc, max_cc, avg_cc};
    std::copy(std::begin(vals), std::end(vals), r.m);
    r.score = 0.9 * s + 0.7 * c + 0.25 * h + 0.2 * inh + 1.1 * rng.normal();
  }

  // Exactly `defective` buggy classes: the highest latent scores.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rows[a].score > rows[b].score; });
  std::vector<int> bugs(n, 0);
  for (std::size_t i = 0; i < shape.defective; ++i) {
    bugs[order[i]] = 1 + static_cast<int>(std::floor(-std::log(1.0 - rng.uniform()) * 0.8));
  }

  std::string csv =
      "name,version,name,wmc,dit,noc,cbo,rfc,lcom,ca,ce,npm,lcom3,loc,dam,moa,mfa,cam,ic,cbm,amc,max_cc,avg_cc,bug\n";
  const std::string pkg = "org.apache." + shape.project + ".";
  for (std::size_t i = 0; i < n; ++i) {
    csv += shape.project + "," + shape.version + "," + pkg + "C" + std::to_string(i);
    for (double v : rows[i].m) csv += "," + num(v);
    csv += "," + std::to_string(bugs[i]) + "\n";
  }
  return csv;
}

fs::path write_corpus(const fs::path& dir, std::uint64_t seed, const std::vector<ReleaseShape>& shapes) {
  fs::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["projects"] = nlohmann::ordered_json::array();
  std::map<std::string, std::size_t> slot;
  for (const auto& s : shapes) {
    const auto file = s.project + "-" + s.version + ".csv";
    std::ofstream out(dir / file, std::ios::binary | std::ios::trunc);
    out << make_release_csv(s, seed);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + (dir / file).string());
    if (!slot.count(s.project)) {
      slot[s.project] = manifest["projects"].size();
      manifest["projects"].push_back({{"name", s.project}, {"releases", nlohmann::ordered_json::array()}});
    }
    manifest["projects"][slot[s.project]]["releases"].push_back({{"version", s.version}, {"path", file}});
  }
  const auto path = dir / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << manifest.dump(2) << "\n";
  return path;
}

}  // namespace metricslim::standin
