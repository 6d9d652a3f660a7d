// SPDX-License-Identifier: Apache-2.0
// nearmimo: near-field distributed MIMO channel simulation and estimation

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
