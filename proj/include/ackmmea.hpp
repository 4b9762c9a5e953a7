// Copyright 2026 The ackmmea Authors.
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

#include "ackmmea/checkpoint.hpp"
#include "ackmmea/config.hpp"
#include "ackmmea/consistgnn.hpp"
#include "ackmmea/error.hpp"
#include "ackmmea/evaluate.hpp"
#include "ackmmea/experiments.hpp"
#include "ackmmea/feature_table.hpp"
#include "ackmmea/kg.hpp"
#include "ackmmea/kg_io.hpp"
#include "ackmmea/loss.hpp"
#include "ackmmea/optimizer.hpp"
#include "ackmmea/pipeline.hpp"
#include "ackmmea/random.hpp"
#include "ackmmea/seeds.hpp"
#include "ackmmea/synthetic.hpp"
#include "ackmmea/tape.hpp"
#include "ackmmea/train.hpp"
#include "ackmmea/transe.hpp"
#include "ackmmea/uniformization.hpp"
