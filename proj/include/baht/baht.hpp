#pragma once

#include "baht/coupling.hpp"
#include "baht/echo.hpp"
#include "baht/errors.hpp"
#include "baht/magnus.hpp"
#include "baht/magnus_oracle.hpp"
#include "baht/matrix_functions.hpp"
#include "baht/operator_matrix.hpp"
#include "baht/parallel.hpp"
#include "baht/propagation.hpp"
#include "baht/rng.hpp"
#include "baht/sequence.hpp"
#include "baht/sequence_parser.hpp"
#include "baht/spin.hpp"
#include "baht/version.hpp"
