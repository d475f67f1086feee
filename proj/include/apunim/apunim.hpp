// Copyright 2026 The Apunim Authors
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

#ifndef APUNIM_APUNIM_HPP_
#define APUNIM_APUNIM_HPP_

#include "apunim/config.hpp"
#include "apunim/csv.hpp"
#include "apunim/error.hpp"
#include "apunim/io.hpp"
#include "apunim/metric.hpp"
#include "apunim/model.hpp"
#include "apunim/parallel.hpp"
#include "apunim/partition.hpp"
#include "apunim/polarization.hpp"
#include "apunim/random.hpp"
#include "apunim/report.hpp"
#include "apunim/significance.hpp"
#include "apunim/synth.hpp"

namespace apunim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace apunim

#endif  // APUNIM_APUNIM_HPP_
