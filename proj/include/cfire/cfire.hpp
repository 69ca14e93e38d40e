/*
 * Copyright 2026 The CFIRE Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CFIRE_CFIRE_HPP_
#define CFIRE_CFIRE_HPP_

#include "cfire/attribution.hpp"
#include "cfire/blackbox.hpp"
#include "cfire/boxes.hpp"
#include "cfire/common.hpp"
#include "cfire/dataset.hpp"
#include "cfire/eval.hpp"
#include "cfire/itemsets.hpp"
#include "cfire/pipeline.hpp"
#include "cfire/rulemodel.hpp"
#include "cfire/synthetic.hpp"

#endif  // CFIRE_CFIRE_HPP_
