// Copyright 2026 The mrsynth Authors.
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

#include "mrsynth/analytics.hpp"
#include "mrsynth/backtranslator.hpp"
#include "mrsynth/binarize.hpp"
#include "mrsynth/chart_parser.hpp"
#include "mrsynth/dataset.hpp"
#include "mrsynth/enumerate.hpp"
#include "mrsynth/error.hpp"
#include "mrsynth/estimation.hpp"
#include "mrsynth/filters.hpp"
#include "mrsynth/grammar.hpp"
#include "mrsynth/io.hpp"
#include "mrsynth/parse_tree.hpp"
#include "mrsynth/pipeline.hpp"
#include "mrsynth/sampler.hpp"
#include "mrsynth/text.hpp"
