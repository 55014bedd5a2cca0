#pragma once

#include "pcat/complex_matrix.hpp"
#include "pcat/dominant.hpp"
#include "pcat/eig.hpp"
#include "pcat/errors.hpp"
#include "pcat/evolution.hpp"
#include "pcat/io.hpp"
#include "pcat/period_solver.hpp"
#include "pcat/periodic.hpp"
#include "pcat/qmetric.hpp"
#include "pcat/rational.hpp"
