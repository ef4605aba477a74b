#pragma once

#include "vimpc/analysis.hpp"
#include "vimpc/core.hpp"
#include "vimpc/errors.hpp"
#include "vimpc/hop1d.hpp"
#include "vimpc/integrate.hpp"
#include "vimpc/slip2d.hpp"
#include "vimpc/sweep.hpp"
