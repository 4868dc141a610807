// Copyright 2026 The infonet Authors
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

#pragma once

#include <span>

#include "infonet/grid.hpp"
#include "infonet/sensors.hpp"

namespace infonet {

// Measurement update of the histogram filter. The target is stationary, so
// there is no prediction step. Throws Error(numeric) if the posterior has no
// mass, which signals a sensor model violation.
Belief update(const Belief& prior, const Sensor& sensor, const GridSpec& grid, PoseSE2 x, int z);
Belief update(const Belief& prior, const LikelihoodTable& table, int state, int z);

// Shannon entropy in nats, with 0 log 0 = 0.
double entropy(std::span<const double> p);
inline double entropy(const Belief& b) { return entropy(b.weights()); }

}  // namespace infonet
