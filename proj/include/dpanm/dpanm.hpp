//
// Copyright 2026 The dpanm Authors
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
//

#ifndef DPANM_DPANM_HPP_
#define DPANM_DPANM_HPP_

#include "dpanm/data_io.hpp"
#include "dpanm/errors.hpp"
#include "dpanm/inference.hpp"
#include "dpanm/kernel.hpp"
#include "dpanm/privacy.hpp"
#include "dpanm/random.hpp"
#include "dpanm/regression.hpp"
#include "dpanm/scores.hpp"

#endif  // DPANM_DPANM_HPP_
