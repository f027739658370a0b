// Copyright 2026 The shellprop Authors
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

#include "shellprop/checkpoint.hpp"
#include "shellprop/dataset.hpp"
#include "shellprop/dense_matrix.hpp"
#include "shellprop/error.hpp"
#include "shellprop/graph.hpp"
#include "shellprop/metrics.hpp"
#include "shellprop/model.hpp"
#include "shellprop/pipeline.hpp"
#include "shellprop/report.hpp"
#include "shellprop/rng.hpp"
#include "shellprop/shells.hpp"
#include "shellprop/sparse_matrix.hpp"
#include "shellprop/synthetic.hpp"
