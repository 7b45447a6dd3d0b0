#pragma once

#include "schauder/campanato.hpp"
#include "schauder/error.hpp"
#include "schauder/fields.hpp"
#include "schauder/io.hpp"
#include "schauder/lattice.hpp"
#include "schauder/mollify.hpp"
#include "schauder/oracle.hpp"
#include "schauder/seminorm.hpp"
#include "schauder/solve.hpp"
#include "schauder/harness/config.hpp"
#include "schauder/harness/emit.hpp"
#include "schauder/harness/experiments.hpp"
#include "schauder/harness/report.hpp"
