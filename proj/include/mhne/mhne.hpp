#pragma once

#include "mhne/eval.hpp"
#include "mhne/intensity.hpp"
#include "mhne/params.hpp"
#include "mhne/synth.hpp"
#include "mhne/temporal_graph.hpp"
#include "mhne/training.hpp"
