// Copyright 2026 The gfu Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GFU_GFU_HPP_
#define GFU_GFU_HPP_

#include "gfu/config.hpp"
#include "gfu/core.hpp"
#include "gfu/covariance.hpp"
#include "gfu/harness.hpp"
#include "gfu/limit_process.hpp"
#include "gfu/linalg.hpp"
#include "gfu/rules.hpp"
#include "gfu/spectral.hpp"
#include "gfu/urn.hpp"

#endif  // GFU_GFU_HPP_
