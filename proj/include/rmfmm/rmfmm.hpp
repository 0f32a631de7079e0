// Copyright 2026 The rmfmm Authors. All Rights Reserved.
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

#ifndef RMFMM_RMFMM_HPP_
#define RMFMM_RMFMM_HPP_

#include "rmfmm/datagen.hpp"
#include "rmfmm/error.hpp"
#include "rmfmm/io.hpp"
#include "rmfmm/kernels.hpp"
#include "rmfmm/ladmpsap.hpp"
#include "rmfmm/mm.hpp"
#include "rmfmm/model.hpp"
#include "rmfmm/random.hpp"
#include "rmfmm/types.hpp"

#endif  // RMFMM_RMFMM_HPP_
