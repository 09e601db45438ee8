#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace metricslim {

/// The fixed vocabulary of static code metrics. Enumerator order is the
/// canonical order used for every tie-break in the toolkit.
enum class MetricId : std::uint8_t {
  WMC, DIT, NOC, CBO, RFC, LCOM, CA, CE, NPM, LCOM3,
  LOC, DAM, MOA, MFA, CAM, IC, CBM, AMC, MAX_CC, AVG_CC,
};

inline constexpr std::size_t kMetricCount = 20;

constexpr std::size_t index_of(MetricId m) noexcept { return static_cast<std::size_t>(m); }
constexpr MetricId metric_at(std::size_t i) noexcept { return static_cast<MetricId>(i); }

/// Upper-case display name ("MAX_CC").
std::string_view metric_name(MetricId m) noexcept;

/// Case-insensitive lookup; surrounding whitespace is ignored.
std::optional<MetricId> parse_metric(std::string_view name);

std::array<MetricId, kMetricCount> all_metrics() noexcept;

/// A set of metrics, always iterated in canonical order.
class FeatureSubset {
 public:
  FeatureSubset() = default;
  FeatureSubset(std::initializer_list<MetricId> members);
  explicit FeatureSubset(const std::vector<MetricId>& members);

  static FeatureSubset all();
  /// Parses "CBO+LOC" or "CBO,LOC". Throws Error(InvalidArgument) on unknown names.
  static FeatureSubset parse(std::string_view text);

  bool contains(MetricId m) const noexcept { return bits_.test(index_of(m)); }
  void insert(MetricId m) noexcept { bits_.set(index_of(m)); }
  void erase(MetricId m) noexcept { bits_.reset(index_of(m)); }
  std::size_t size() const noexcept { return bits_.count(); }
  bool empty() const noexcept { return bits_.none(); }

  std::vector<MetricId> members() const;
  std::vector<std::size_t> indices() const;

  std::size_t intersection_size(const FeatureSubset& other) const noexcept {
    return (bits_ & other.bits_).count();
  }
  std::size_t union_size(const FeatureSubset& other) const noexcept {
    return (bits_ | other.bits_).count();
  }
  bool is_subset_of(const FeatureSubset& other) const noexcept {
    return (bits_ & ~other.bits_).none();
  }

  /// "CBO+LOC+LCOM" style label in canonical order; "{}" when empty.
  std::string to_string() const;

  /// Size first, then lexicographic on canonical member indices.
  friend bool canonical_less(const FeatureSubset& a, const FeatureSubset& b);

  friend bool operator==(const FeatureSubset& a, const FeatureSubset& b) noexcept {
    return a.bits_ == b.bits_;
  }

  std::uint32_t bits() const noexcept { return static_cast<std::uint32_t>(bits_.to_ulong()); }

 private:
  std::bitset<kMetricCount> bits_;
};

bool canonical_less(const FeatureSubset& a, const FeatureSubset& b);

}  // namespace metricslim
