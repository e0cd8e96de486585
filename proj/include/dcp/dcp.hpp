/*
 * Copyright 2026 The dcp Authors.
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

// Convenience header pulling in the whole library.

#pragma once

#include "dcp/audit.hpp"
#include "dcp/bench.hpp"
#include "dcp/bytes.hpp"
#include "dcp/command.hpp"
#include "dcp/command_corpus.hpp"
#include "dcp/dashcam.hpp"
#include "dcp/device.hpp"
#include "dcp/elgamal.hpp"
#include "dcp/elgamal_secret.hpp"
#include "dcp/embedding.hpp"
#include "dcp/group.hpp"
#include "dcp/rng.hpp"
#include "dcp/scenario.hpp"
#include "dcp/simulator.hpp"
#include "dcp/transport.hpp"
#include "dcp/wire.hpp"
#include "dcp/zkp.hpp"
#include "dcp/zkp_prover.hpp"
