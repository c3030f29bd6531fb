#pragma once

// Umbrella header.

#include "wavewidth/experiments.hpp"
#include "wavewidth/geometry.hpp"
#include "wavewidth/greedy.hpp"
#include "wavewidth/linalg.hpp"
#include "wavewidth/manifold.hpp"
#include "wavewidth/quadrature.hpp"
#include "wavewidth/widths.hpp"
