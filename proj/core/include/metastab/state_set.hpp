#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "metastab/types.hpp"

namespace metastab {

// A subset of {-1,+1}^N.  Two representations, both exact:
//  - explicit state indices (any subset, small N), and
//  - magnetization levels (a set of up-spin counts), which also works for
//    dynamics at sizes where 2^N indicators are unaffordable.
// For N within the enumeration limit an indicator mask is materialized so
// membership tests are O(1) either way.
class StateSet {
 public:
  StateSet() = default;

  static StateSet from_states(int N, std::vector<State> states) {
    StateSet s;
    s.N_ = N;
    std::sort(states.begin(), states.end());
    states.erase(std::unique(states.begin(), states.end()), states.end());
    s.states_ = std::move(states);
    s.build_mask();
    return s;
  }

  // All states whose up-spin count lies in `ks` (magnetization pre-image).
  static StateSet from_levels(int N, std::set<int> ks) {
    StateSet s;
    s.N_ = N;
    s.levels_ = std::move(ks);
    for (int k : s.levels_)
      if (k < 0 || k > N) throw ConfigError("StateSet: level out of range");
    if (N <= kDefaultEnumLimit) {
      for (State x = 0; x < (State(1) << N); ++x)
        if (s.levels_.count(up_count(x))) s.states_.push_back(x);
      s.build_mask();
    }
    return s;
  }

  static StateSet singleton(int N, State x) { return from_states(N, {x}); }

  int dim() const { return N_; }
  bool level_defined() const { return !levels_.empty(); }
  const std::set<int>& levels() const { return levels_; }

  bool contains(State x) const {
    if (!mask_.empty()) return mask_[x] != 0;
    if (!levels_.empty()) return levels_.count(up_count(x)) != 0;
    return std::binary_search(states_.begin(), states_.end(), x);
  }

  // Membership from an up-spin count alone (for dynamics beyond mask sizes);
  // only valid for level-defined sets.
  bool contains_level(int k) const { return levels_.count(k) != 0; }

  const std::vector<State>& members() const { return states_; }
  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty() && levels_.empty(); }

  bool disjoint(const StateSet& other) const {
    for (State x : states_)
      if (other.contains(x)) return false;
    for (State x : other.states_)
      if (contains(x)) return false;
    if (!levels_.empty() && !other.levels_.empty())
      for (int k : levels_)
        if (other.levels_.count(k)) return false;
    return true;
  }

 private:
  void build_mask() {
    if (N_ <= kDefaultEnumLimit) {
      mask_.assign(std::size_t(1) << N_, 0);
      for (State x : states_) mask_[x] = 1;
    }
  }

  int N_ = 0;
  std::vector<State> states_;   // sorted, may be empty for large-N level sets
  std::vector<unsigned char> mask_;
  std::set<int> levels_;
};

}  // namespace metastab
