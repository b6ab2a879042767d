// Copyright 2026 The primsel Authors
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

#ifndef PRIMSEL_PRIMSEL_HPP_
#define PRIMSEL_PRIMSEL_HPP_

#include "primsel/branch_and_bound.hpp"
#include "primsel/chain_labels.hpp"
#include "primsel/core.hpp"
#include "primsel/cost.hpp"
#include "primsel/error.hpp"
#include "primsel/ilp_problem.hpp"
#include "primsel/io.hpp"
#include "primsel/pareto.hpp"
#include "primsel/strategies.hpp"
#include "primsel/synth.hpp"
#include "primsel/workspace.hpp"

#endif  // PRIMSEL_PRIMSEL_HPP_
