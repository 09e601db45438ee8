#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

// Synthetic corpus with the shape of the public PROMISE defect releases:
// same projects, release names, class counts and defective counts, with
// metric values drawn from a latent size/coupling/cohesion model. Used when
// the real CSV files are not available.
namespace metricslim::standin {

struct ReleaseShape {
  std::string project;
  std::string version;
  std::size_t instances = 0;
  std::size_t defective = 0;
};

/// The 34 releases of the ten projects, in project then version order.
const std::vector<ReleaseShape>& promise_shapes();

/// One release as CSV in the PROMISE column layout.
std::string make_release_csv(const ReleaseShape& shape, std::uint64_t seed);

/// Writes one CSV per release plus manifest.json; returns the manifest path.
std::filesystem::path write_corpus(const std::filesystem::path& dir, std::uint64_t seed,
                                   const std::vector<ReleaseShape>& shapes = promise_shapes());

}  // namespace metricslim::standin
