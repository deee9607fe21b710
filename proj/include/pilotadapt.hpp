// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "pilotadapt/asymptotic.hpp"
#include "pilotadapt/channel.hpp"
#include "pilotadapt/config.hpp"
#include "pilotadapt/core_model.hpp"
#include "pilotadapt/error.hpp"
#include "pilotadapt/estimation.hpp"
#include "pilotadapt/harness.hpp"
#include "pilotadapt/pattern.hpp"
#include "pilotadapt/phy.hpp"
#include "pilotadapt/rng.hpp"
#include "pilotadapt/scheduler.hpp"
#include "pilotadapt/stats.hpp"
