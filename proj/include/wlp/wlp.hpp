#pragma once

#include "wlp/csv.hpp"
#include "wlp/dirac.hpp"
#include "wlp/eisenstein.hpp"
#include "wlp/error.hpp"
#include "wlp/grid.hpp"
#include "wlp/immersion.hpp"
#include "wlp/moebius.hpp"
#include "wlp/specfun.hpp"
#include "wlp/spectral.hpp"
#include "wlp/wave.hpp"
