// Copyright 2026 The hqsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Physical constants and unit conversions. The canonical energy unit of the
// toolkit is h*GHz; FCI internals work in meV and nm and convert at the edge.

namespace hqsim::units {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// 1 ueV expressed in h*GHz.
inline constexpr double kHGhzPerMicroEv = 0.241799;
/// 1 meV expressed in h*GHz.
inline constexpr double kHGhzPerMeV = 241.799;

/// hbar^2 / (2 m_e) in meV nm^2.
inline constexpr double kHbar2Over2MeMeVNm2 = 38.0998212;
/// e^2 / (4 pi eps0) in meV nm.
inline constexpr double kCoulombMeVNm = 1439.96448;

inline constexpr double kGaAsEffectiveMass = 0.067;
inline constexpr double kGaAsDielectric = 12.9;

constexpr double micro_ev_to_hghz(double micro_ev) { return micro_ev * kHGhzPerMicroEv; }
constexpr double hghz_to_micro_ev(double hghz) { return hghz / kHGhzPerMicroEv; }
constexpr double mev_to_hghz(double mev) { return mev * kHGhzPerMeV; }
constexpr double hghz_to_mev(double hghz) { return hghz / kHGhzPerMeV; }

}  // namespace hqsim::units
