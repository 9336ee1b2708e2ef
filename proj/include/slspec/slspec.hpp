#pragma once

#include "slspec/errors.hpp"
#include "slspec/numkernel.hpp"
#include "slspec/coeffs.hpp"
#include "slspec/symplectic.hpp"
#include "slspec/flow.hpp"
#include "slspec/oracle.hpp"
#include "slspec/hill.hpp"
#include "slspec/trace.hpp"
