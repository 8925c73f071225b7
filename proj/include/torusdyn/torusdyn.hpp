#pragma once

#include "torusdyn/core.hpp"
#include "torusdyn/torus_geometry.hpp"
#include "torusdyn/disk_model.hpp"
#include "torusdyn/map_catalog.hpp"
#include "torusdyn/dilatation_field.hpp"
#include "torusdyn/entropy_estimator.hpp"
#include "torusdyn/wandering_domains.hpp"
#include "torusdyn/config.hpp"
#include "torusdyn/reports.hpp"
