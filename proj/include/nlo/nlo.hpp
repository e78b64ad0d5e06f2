// Copyright 2026 The nlosim Authors
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

#include "nlo/circuit.hpp"
#include "nlo/engine.hpp"
#include "nlo/fock.hpp"
#include "nlo/gbqc.hpp"
#include "nlo/mbqc.hpp"
#include "nlo/metrics.hpp"
#include "nlo/noise.hpp"
#include "nlo/oracle.hpp"
#include "nlo/reck.hpp"
#include "nlo/rng.hpp"
#include "nlo/serialize.hpp"
#include "nlo/sweep.hpp"
#include "nlo/validate.hpp"
#include "nlo/vqa.hpp"
