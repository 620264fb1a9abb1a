#pragma once

#include "jmgt/common.hpp"
#include "jmgt/geometry/mesh.hpp"
#include "jmgt/geometry/partition.hpp"
#include "jmgt/geometry/multiplier_field.hpp"
#include "jmgt/assembly/params.hpp"
#include "jmgt/assembly/operators.hpp"
#include "jmgt/assembly/block_operator.hpp"
#include "jmgt/assembly/model.hpp"
#include "jmgt/evolution/state.hpp"
#include "jmgt/evolution/stepper.hpp"
#include "jmgt/evolution/initial_data.hpp"
#include "jmgt/evolution/integrate.hpp"
#include "jmgt/diagnostics/energy.hpp"
#include "jmgt/diagnostics/identities.hpp"
#include "jmgt/spectral/spectrum.hpp"
#include "jmgt/spectral/checks.hpp"
#include "jmgt/lab/fit.hpp"
#include "jmgt/lab/experiments.hpp"
