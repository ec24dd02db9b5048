// SPDX-License-Identifier: Apache-2.0
//
// irsbs: simulator and reflection optimizer for radome-integrated reflecting surfaces
// Copyright (C) 2026 The irsbs authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#ifndef IRSBS_IRSBS_HPP
#define IRSBS_IRSBS_HPP

#include "channel.hpp"
#include "config.hpp"
#include "config_file.hpp"
#include "experiments.hpp"
#include "geometry.hpp"
#include "optimize.hpp"
#include "propagation.hpp"
#include "random.hpp"
#include "rate.hpp"

#endif
