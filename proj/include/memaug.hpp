#pragma once

#include "memaug/analysis/closed_form.hpp"
#include "memaug/analysis/improvement.hpp"
#include "memaug/analysis/observation_values.hpp"
#include "memaug/analysis/occupancy.hpp"
#include "memaug/analysis/policy_search.hpp"
#include "memaug/analysis/sufficiency.hpp"
#include "memaug/augmented.hpp"
#include "memaug/belief.hpp"
#include "memaug/environments.hpp"
#include "memaug/evaluation.hpp"
#include "memaug/learners.hpp"
#include "memaug/memory.hpp"
#include "memaug/policy.hpp"
#include "memaug/pomdp.hpp"
#include "memaug/pomdp_json.hpp"
