#pragma once

#include "road/agent.hpp"
#include "road/bandit.hpp"
#include "road/harness.hpp"
#include "road/mdp.hpp"
#include "road/replay.hpp"
#include "road/surrogate.hpp"
#include "road/theory.hpp"
