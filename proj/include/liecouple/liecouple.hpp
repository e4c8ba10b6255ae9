#pragma once

#include "liecouple/algebra_catalog.hpp"
#include "liecouple/bundle.hpp"
#include "liecouple/config.hpp"
#include "liecouple/coupling.hpp"
#include "liecouple/error.hpp"
#include "liecouple/expression.hpp"
#include "liecouple/geometry.hpp"
#include "liecouple/lie_algebra.hpp"
#include "liecouple/linalg.hpp"
#include "liecouple/report.hpp"
#include "liecouple/scenarios.hpp"
#include "liecouple/tolerances.hpp"
