#pragma once

#include "lyapoqs/types.hpp"

namespace lyapoqs {

// Digamma function for complex argument (recurrence plus asymptotic series).
cplx digamma(cplx z);

// 1/(e^x + 1) and 1/(e^x - 1) evaluated without overflow.
double fermi_factor(double x);
cplx fermi_factor(cplx x);
double bose_factor(double x);
cplx bose_factor(cplx x);

}  // namespace lyapoqs
