// Copyright 2026 The berrycount Authors.
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

#include "berrycount/filters.hpp"
#include "berrycount/instancer.hpp"
#include "berrycount/labelgen.hpp"
#include "berrycount/metrics.hpp"
#include "berrycount/pipeline.hpp"
#include "berrycount/raster.hpp"
#include "berrycount/rng.hpp"
#include "berrycount/synth.hpp"
#include "berrycount/tiler.hpp"
