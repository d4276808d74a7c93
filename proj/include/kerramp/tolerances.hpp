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

#ifndef KERRAMP_TOLERANCES_HPP
#define KERRAMP_TOLERANCES_HPP

namespace kerramp::tol {

inline constexpr double herm = 1e-10;
inline constexpr double trace = 1e-10;
inline constexpr double pos = 1e-8;
inline constexpr double unitary = 1e-9;
inline constexpr double expm = 1e-12;
inline constexpr double cptp = 1e-8;
// Agreement between truncated and closed-form operators on a low Fock block.
inline constexpr double trunc = 1e-8;
// Relative change accepted by the cutoff convergence protocol.
inline constexpr double convergence = 1e-3;
// Kraus operators with smaller HS norm are dropped.
inline constexpr double kraus_drop = 1e-14;

}  // namespace kerramp::tol

#endif  // KERRAMP_TOLERANCES_HPP
