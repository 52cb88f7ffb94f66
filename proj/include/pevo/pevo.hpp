// Copyright 2026 the pevo authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "pevo/arena.hpp"
#include "pevo/engine.hpp"
#include "pevo/errors.hpp"
#include "pevo/gateway.hpp"
#include "pevo/match.hpp"
#include "pevo/rating.hpp"
#include "pevo/rng.hpp"
#include "pevo/roster.hpp"
#include "pevo/scorecard.hpp"
#include "pevo/serialize.hpp"
#include "pevo/simlab.hpp"
#include "pevo/taskbank.hpp"
#include "pevo/variation.hpp"
