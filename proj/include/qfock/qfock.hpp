#ifndef QFOCK_QFOCK_HPP
#define QFOCK_QFOCK_HPP

#include "qfock/error.hpp"
#include "qfock/rational.hpp"
#include "qfock/stepfn.hpp"
#include "qfock/fock_core.hpp"
#include "qfock/normal_order.hpp"
#include "qfock/factorization.hpp"
#include "qfock/gram.hpp"

#endif  // QFOCK_QFOCK_HPP
