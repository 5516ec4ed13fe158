#pragma once

#include "cvq/errors.hpp"
#include "cvq/gaussian_state.hpp"
#include "cvq/optics.hpp"
#include "cvq/entanglement.hpp"
#include "cvq/io.hpp"
#include "cvq/pipeline.hpp"
#include "cvq/reference_data.hpp"
