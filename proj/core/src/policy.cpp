#include "persuade/policy.hpp"

#include <algorithm>
#include <sstream>

#include "persuade/error.hpp"

namespace persuade {

MarkovPolicy::MarkovPolicy(std::vector<PolicyRegion> regions, std::vector<Cutoff> cutoffs)
    : regions_(std::move(regions)), cutoffs_(std::move(cutoffs)) {
  if (regions_.empty()) throw Error(ErrorKind::PolicyGap, "policy has no regions");
  const auto& first = regions_.front();
  const auto& last = regions_.back();
  if (first.lo != 0.0 || !first.lo_closed || last.hi != 1.0 || !last.hi_closed) {
    throw Error(ErrorKind::PolicyGap, "regions must cover [0,1] including both endpoints");
  }
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const auto& r = regions_[i];
    const bool point = r.lo == r.hi && r.lo_closed && r.hi_closed;
    if (!(r.lo < r.hi) && !point) {
      std::ostringstream os;
      os << "empty region [" << r.lo << ", " << r.hi << "]";
      throw Error(ErrorKind::PolicyGap, os.str());
    }
    if (i > 0) {
      const auto& prev = regions_[i - 1];
      if (prev.hi != r.lo || prev.hi_closed == r.lo_closed) {
        std::ostringstream os;
        os << "regions do not meet cleanly at " << r.lo;
        throw Error(ErrorKind::PolicyGap, os.str());
      }
    }
    if (const auto* split = std::get_if<Split>(&r.action)) {
      if (!(split->low < split->high) || split->low > r.lo || split->high < r.hi) {
        std::ostringstream os;
        os << "split {" << split->low << ", " << split->high << "} does not bracket region ["
           << r.lo << ", " << r.hi << "]";
        throw Error(ErrorKind::BracketViolation, os.str());
      }
    }
  }
}

const PolicyRegion& MarkovPolicy::region_at(double p) const {
  auto it = std::upper_bound(regions_.begin(), regions_.end(), p,
                             [](double x, const PolicyRegion& r) { return x < r.lo; });
  if (it != regions_.begin()) {
    auto idx = static_cast<std::size_t>(it - regions_.begin()) - 1;
    if (regions_[idx].contains(p)) return regions_[idx];
    if (idx > 0 && regions_[idx - 1].contains(p)) return regions_[idx - 1];
  }
  std::ostringstream os;
  os << "no region contains belief " << p;
  throw Error(ErrorKind::PolicyGap, os.str());
}

MarkovPolicy slide_only_policy() {
  return MarkovPolicy({PolicyRegion{0.0, 1.0, true, true, Slide{}}});
}

MarkovPolicy full_disclosure_policy() {
  return MarkovPolicy({PolicyRegion{0.0, 1.0, true, true, Split{0.0, 1.0}}});
}

}  // namespace persuade
