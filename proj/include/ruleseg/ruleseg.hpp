// Copyright 2026 The ruleseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Convenience header: the whole library.

#ifndef RULESEG_RULESEG_HPP_
#define RULESEG_RULESEG_HPP_

#include "ruleseg/bench.hpp"
#include "ruleseg/commands.hpp"
#include "ruleseg/context.hpp"
#include "ruleseg/encode.hpp"
#include "ruleseg/error.hpp"
#include "ruleseg/io.hpp"
#include "ruleseg/lp.hpp"
#include "ruleseg/metrics.hpp"
#include "ruleseg/model.hpp"
#include "ruleseg/pipeline.hpp"
#include "ruleseg/rules.hpp"
#include "ruleseg/scoring.hpp"
#include "ruleseg/solve.hpp"

#endif  // RULESEG_RULESEG_HPP_
