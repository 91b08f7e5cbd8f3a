#pragma once

#include "model.hpp"
#include "cgf_analytic.hpp"
#include "wigner_flow.hpp"
#include "fock_oracle.hpp"
#include "provider.hpp"
#include "cumulants.hpp"
#include "closed_forms.hpp"
#include "inversion.hpp"
#include "thermo_checks.hpp"
#include "measurement.hpp"
#include "config.hpp"
