#pragma once

#include "lapleg/numeric.hpp"
#include "lapleg/convexgeom.hpp"
#include "lapleg/legendre.hpp"
#include "lapleg/contour.hpp"
#include "lapleg/transforms.hpp"
#include "lapleg/growth.hpp"
#include "lapleg/dolbeault.hpp"
#include "lapleg/scenario.hpp"
