#pragma once

#include "truncbound/adapt.hpp"
#include "truncbound/bounds.hpp"
#include "truncbound/censor.hpp"
#include "truncbound/error.hpp"
#include "truncbound/kernel.hpp"
#include "truncbound/models.hpp"
#include "truncbound/representation.hpp"
#include "truncbound/state_space.hpp"
