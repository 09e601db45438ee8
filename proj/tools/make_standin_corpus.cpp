#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "standin/standin.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic 34-release corpus shaped like the PROMISE releases"};
  std::string out = "standin";
  std::uint64_t seed = 20240917;
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);
  try {
    const auto manifest = metricslim::standin::write_corpus(out, seed);
    std::cout << manifest.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "make_standin_corpus: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
