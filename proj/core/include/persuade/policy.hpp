#pragma once

#include <span>
#include <variant>
#include <vector>

namespace persuade {

/// Reveal nothing; the belief drifts toward p*.
struct Slide {
  friend bool operator==(const Slide&, const Slide&) = default;
};

/// Split the current belief into the two posteriors {low, high}.
struct Split {
  double low;
  double high;
  friend bool operator==(const Split&, const Split&) = default;
};

using Action = std::variant<Slide, Split>;

struct PolicyRegion {
  double lo;
  double hi;
  bool lo_closed = true;
  bool hi_closed = false;
  Action action = Slide{};

  bool contains(double p) const noexcept {
    return (p > lo || (lo_closed && p == lo)) && (p < hi || (hi_closed && p == hi));
  }
  friend bool operator==(const PolicyRegion&, const PolicyRegion&) = default;
};

/// Boundary q_j between the slide and split parts of continuity interval j.
struct Cutoff {
  double belief;
  int interval;
  friend bool operator==(const Cutoff&, const Cutoff&) = default;
};

/// Stationary policy: a partition of [0,1] into slide and split regions.
class MarkovPolicy {
 public:
  MarkovPolicy() = default;
  /// Throws PolicyGap unless the regions partition [0,1] in order, and
  /// BracketViolation if a split region is not inside its own targets.
  explicit MarkovPolicy(std::vector<PolicyRegion> regions, std::vector<Cutoff> cutoffs = {});

  std::span<const PolicyRegion> regions() const noexcept { return regions_; }
  std::span<const Cutoff> cutoffs() const noexcept { return cutoffs_; }

  const PolicyRegion& region_at(double p) const;
  const Action& action_at(double p) const { return region_at(p).action; }

  friend bool operator==(const MarkovPolicy&, const MarkovPolicy&) = default;

 private:
  std::vector<PolicyRegion> regions_;
  std::vector<Cutoff> cutoffs_;
};

MarkovPolicy slide_only_policy();
MarkovPolicy full_disclosure_policy();

}  // namespace persuade
