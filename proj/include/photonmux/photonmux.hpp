#pragma once

#include "photonmux/config.hpp"
#include "photonmux/counting.hpp"
#include "photonmux/dispersion.hpp"
#include "photonmux/error.hpp"
#include "photonmux/io.hpp"
#include "photonmux/jsa.hpp"
#include "photonmux/multiplex.hpp"
#include "photonmux/rng.hpp"
#include "photonmux/schmidt.hpp"
#include "photonmux/statistics.hpp"
#include "photonmux/tomography.hpp"
#include "photonmux/units.hpp"
#include "photonmux/version.hpp"
