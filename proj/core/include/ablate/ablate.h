/*
 * Copyright 2026 The Ablate Authors.
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

// Umbrella header.

#ifndef ABLATE_ABLATE_H_
#define ABLATE_ABLATE_H_

#include "ablate/attribution.h"
#include "ablate/augment.h"
#include "ablate/dataset.h"
#include "ablate/error.h"
#include "ablate/harness.h"
#include "ablate/io.h"
#include "ablate/linear.h"
#include "ablate/nn.h"
#include "ablate/penalty.h"
#include "ablate/rng.h"

#endif  // ABLATE_ABLATE_H_
