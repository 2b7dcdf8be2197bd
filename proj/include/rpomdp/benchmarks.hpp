#pragma once

#include "rpomdp/model.hpp"
#include "rpomdp/policies.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

/**
 * Builders for the benchmark models, their reference values and known
 * optimal policy pairs.
 */
namespace rpomdp {

enum class BenchmarkId {
  Fig1RmdpU1,
  Fig1RmdpU2,
  Fig2Sticky,
  Fig3OrderSmall,
  Fig5ObsStickyLeft,
  Fig5ObsStickyRight,
  AppCObsSticky,
  AppD4Arect,
};

std::vector<BenchmarkId> all_benchmarks();
/// Identifier such as `fig2_sticky`.
std::string benchmark_name(BenchmarkId id);
std::optional<BenchmarkId> parse_benchmark_id(const std::string& name);

/// Optional overrides of a benchmark's stickiness and order of play.
struct BenchmarkVariant {
  std::optional<StickinessKind> stickiness;
  std::optional<PlayOrder> play_order;
};

Rpomdp build_benchmark(BenchmarkId id, const BenchmarkVariant& variant = {});

/// Horizon at which all of a benchmark's reward has been collected.
std::size_t benchmark_horizon(BenchmarkId id);

/// A known optimal value with, where available, an optimal policy pair.
struct ReferenceCase {
  std::string name;
  BenchmarkId id;
  BenchmarkVariant variant;
  std::size_t horizon;
  Rational value;
  /// True if the solver is expected to reproduce the value exactly with gap 0;
  /// otherwise within the configured tolerance.
  bool exact;
  /// Policy files of an optimal pair (empty if not tabulated).
  std::string agent_policy;
  std::string nature_policy;
};

std::vector<ReferenceCase> reference_cases();

}  // namespace rpomdp
