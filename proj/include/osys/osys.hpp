// Copyright 2026 The osys Authors
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

#include "osys/indlimit.hpp"
#include "osys/matcore.hpp"
#include "osys/opsys.hpp"
#include "osys/random.hpp"
#include "osys/tensorlab.hpp"
#include "osys/uhf/canonical_embed.hpp"
#include "osys/uhf/graph_system.hpp"
#include "osys/uhf/iso_search.hpp"
#include "osys/uhf/relation.hpp"
#include "osys/uhf/spec.hpp"
