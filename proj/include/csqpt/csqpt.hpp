#pragma once

#include "csqpt/analysis.hpp"
#include "csqpt/errors.hpp"
#include "csqpt/fock.hpp"
#include "csqpt/homodyne.hpp"
#include "csqpt/io.hpp"
#include "csqpt/linalg.hpp"
#include "csqpt/mle.hpp"
#include "csqpt/pipeline.hpp"
#include "csqpt/quadrature.hpp"
#include "csqpt/wavefunction.hpp"
#include "csqpt/wigner.hpp"
