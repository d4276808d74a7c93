// Copyright 2026 The kerramp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KERRAMP_CONVERGENCE_HPP
#define KERRAMP_CONVERGENCE_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "kerramp/tolerances.hpp"

namespace kerramp {

// Cutoff search: evaluate at d and d + step; accept when the relative change
// is below rel_tol, otherwise grow d by max(step, d / 2) until max_cutoff.
struct CutoffPolicy {
  int start = 6;
  int step = 5;
  int max_cutoff = 60;
  double rel_tol = tol::convergence;
  // Changes below this are accepted regardless of the reference value.
  double abs_floor = 1e-12;

  void validate() const {
    if (start < 2) throw std::invalid_argument("CutoffPolicy: start cutoff must be >= 2");
    if (step < 1) throw std::invalid_argument("CutoffPolicy: step must be >= 1");
    if (max_cutoff < start + step) throw std::invalid_argument("CutoffPolicy: max cutoff below start + step");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("CutoffPolicy: rel_tol must be > 0");
  }
};

struct Converged {
  double value = 0.0;
  int cutoff = 0;  // the larger cutoff of the accepted pair
  bool converged = false;
  double change = 0.0;
};

template <class Eval>
Converged converge_cutoff(Eval&& eval, const CutoffPolicy& policy) {
  policy.validate();
  std::map<int, double> cache;
  auto at = [&](int d) {
    auto it = cache.find(d);
    if (it != cache.end()) return it->second;
    const double v = eval(d);
    cache.emplace(d, v);
    return v;
  };
  int d = policy.start;
  Converged out;
  while (true) {
    const int hi = d + policy.step;
    const double lo_v = at(d);
    const double hi_v = at(hi);
    out.value = hi_v;
    out.cutoff = hi;
    out.change = std::abs(hi_v - lo_v);
    if (std::isfinite(hi_v) && out.change <= std::max(policy.rel_tol * std::abs(hi_v), policy.abs_floor)) {
      out.converged = true;
      return out;
    }
    const int next = d + std::max(policy.step, d / 2);
    if (next + policy.step > policy.max_cutoff) {
      // One last pair ending exactly at the cap, when it is new.
      const int last = policy.max_cutoff - policy.step;
      if (last > d) {
        d = last;
        continue;
      }
      out.converged = false;
      return out;
    }
    d = next;
  }
}

// Vector-valued variant: all entries are evaluated together at each cutoff
// and each entry keeps the first pair at which it converged.
template <class Eval>
std::vector<Converged> converge_cutoff_all(Eval&& eval, const CutoffPolicy& policy) {
  policy.validate();
  std::map<int, std::vector<double>> cache;
  auto at = [&](int d) -> const std::vector<double>& {
    auto it = cache.find(d);
    if (it == cache.end()) it = cache.emplace(d, eval(d)).first;
    return it->second;
  };
  std::vector<Converged> out;
  std::vector<bool> done;
  int d = policy.start;
  while (true) {
    const int hi = d + policy.step;
    const std::vector<double> lo_v = at(d);
    const std::vector<double>& hi_v = at(hi);
    if (lo_v.size() != hi_v.size()) throw std::logic_error("converge_cutoff_all: evaluation size changed");
    if (out.empty()) {
      out.resize(hi_v.size());
      done.assign(hi_v.size(), false);
    }
    bool all = true;
    for (std::size_t k = 0; k < hi_v.size(); ++k) {
      if (done[k]) continue;
      out[k].value = hi_v[k];
      out[k].cutoff = hi;
      out[k].change = std::abs(hi_v[k] - lo_v[k]);
      if (std::isfinite(hi_v[k]) && out[k].change <= std::max(policy.rel_tol * std::abs(hi_v[k]), policy.abs_floor)) {
        out[k].converged = true;
        done[k] = true;
      } else {
        all = false;
      }
    }
    if (all) return out;
    int next = d + std::max(policy.step, d / 2);
    if (next + policy.step > policy.max_cutoff) {
      const int last = policy.max_cutoff - policy.step;
      if (last <= d) return out;
      next = last;
    }
    d = next;
  }
}

}  // namespace kerramp

#endif  // KERRAMP_CONVERGENCE_HPP
