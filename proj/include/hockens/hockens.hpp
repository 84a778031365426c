#pragma once

#include "hockens/error.hpp"
#include "hockens/geometry.hpp"
#include "hockens/hoeckens.hpp"
#include "hockens/mechanism.hpp"
#include "hockens/optimize.hpp"
#include "hockens/force.hpp"
