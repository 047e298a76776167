// Copyright 2026 The mssg Authors.
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

#include "mssg/abf.hpp"
#include "mssg/alloc.hpp"
#include "mssg/common.hpp"
#include "mssg/core.hpp"
#include "mssg/equilibrium.hpp"
#include "mssg/game.hpp"
#include "mssg/grid.hpp"
#include "mssg/oracle.hpp"
#include "mssg/robustness.hpp"
#include "mssg/simplex.hpp"
