#pragma once

#include "hamrec/lattice.hpp"
#include "hamrec/linalg.hpp"
#include "hamrec/site_operators.hpp"
#include "hamrec/pauli.hpp"
#include "hamrec/product_operator.hpp"
#include "hamrec/local_basis.hpp"
#include "hamrec/hamiltonian.hpp"
#include "hamrec/spectra.hpp"
#include "hamrec/correlation.hpp"
#include "hamrec/reconstruction.hpp"
#include "hamrec/momentum.hpp"
#include "hamrec/subregion.hpp"
#include "hamrec/io.hpp"
