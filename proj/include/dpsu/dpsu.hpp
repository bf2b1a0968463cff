//
// Copyright 2026 The DPSU Authors
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
//

#pragma once

#include "dpsu/builder.hpp"
#include "dpsu/calibration.hpp"
#include "dpsu/core.hpp"
#include "dpsu/experiments.hpp"
#include "dpsu/ingestion.hpp"
#include "dpsu/json_io.hpp"
#include "dpsu/policies.hpp"
#include "dpsu/release.hpp"
#include "dpsu/sensitivity_lab.hpp"
#include "dpsu/stats.hpp"
