#ifndef SPINBUS_SPINBUS_HPP
#define SPINBUS_SPINBUS_HPP

// Transverse-field Ising chain as a two-qubit entanglement bus:
// chain diagonalization -> Pfaffian correlation functions -> dynamical
// structure factors -> effective two-qubit Hamiltonian -> concurrence
// dynamics, with dense small-chain oracles for every stage.

#include "spinbus/chain.hpp"
#include "spinbus/correlation.hpp"
#include "spinbus/coupling.hpp"
#include "spinbus/dsf.hpp"
#include "spinbus/dynamics.hpp"
#include "spinbus/exact.hpp"
#include "spinbus/parallel.hpp"
#include "spinbus/pfaffian.hpp"
#include "spinbus/sweep.hpp"

#endif // SPINBUS_SPINBUS_HPP
