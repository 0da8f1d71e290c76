// Copyright 2026 The pgmvg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#ifndef PGMVG_PGMVG_HPP
#define PGMVG_PGMVG_HPP

#include "pgmvg/assess.hpp"
#include "pgmvg/core_types.hpp"
#include "pgmvg/error.hpp"
#include "pgmvg/evaluation.hpp"
#include "pgmvg/graph.hpp"
#include "pgmvg/io_formats.hpp"
#include "pgmvg/knn.hpp"
#include "pgmvg/parallel.hpp"
#include "pgmvg/preprocess.hpp"
#include "pgmvg/progressive.hpp"
#include "pgmvg/report.hpp"
#include "pgmvg/synth.hpp"
#include "pgmvg/union_find.hpp"

#endif  // PGMVG_PGMVG_HPP
