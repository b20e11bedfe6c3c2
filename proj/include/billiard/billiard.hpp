#pragma once

#include "basis.hpp"
#include "secular.hpp"
#include "point_scatterer.hpp"
#include "finite_impurity.hpp"
#include "oracle.hpp"
#include "classifier.hpp"
