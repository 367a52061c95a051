// GENERATED by tests/oracle/constants_reference.py -- do not edit.
// Reference constant values at 60-digit precision, rounded to double.
#pragma once

#include <limits>

namespace semisplit_test {

struct FrozenConstantSet {
  const char* name;
  int pot_kind;        // 0 = zero, 1 = harmonic, 2 = pendulum
  double pot_param;
  double T, dt, mu0, nu0, p_moment, hbar, m_prime;
  int d;
  double c_T, d_T, c_uniform, d_uniform;   // NaN = ineligible
  double semicl_simple, semicl_strang;
  double pf_t, pf_lambda, pf_expected;
};

inline constexpr FrozenConstantSet kFrozenConstantSets[] = {
    {"free_unit", 0, 0.0,
     1.0000000000000000, 0.10000000000000000, 1.0000000000000000, 1.0000000000000000, 0.19947114020071640, 0.010000000000000000, 7.0000000000000000, 1,
     52.043019765718284, 16.184066753675589, 52.043019765718284, 16.184066753675589,
     5.9479583422636374, 0.90549703322856494,
     0.50000000000000000, 0.0, 1.0000000000000000},
    {"pendulum_default", 2, 1.0000000000000000,
     1.0000000000000000, 0.20000000000000000, 1.1250000000000000, 0.074218750000000000, 0.19947114020071640, 0.0010000000000000000, 7.0000000000000000, 1,
     69.293153107990620, 11.984435055747048, 69.293153107990620, 11.984435055747048,
     14.093795412805045, 0.71454219343680336,
     0.50000000000000000, 0.0, 1.2840254166877415},
    {"harmonic_short", 1, 1.5000000000000000,
     0.50000000000000000, 0.050000000000000000, 2.0000000000000000, 0.50000000000000000, 0.30000000000000000, 0.10000000000000000, 2.5000000000000000, 1,
     464.54814510279413, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
     26.738968225088339, std::numeric_limits<double>::quiet_NaN(),
     0.50000000000000000, 1.0000000000000000, 4.5522654037938832},
    {"pendulum_stiff", 2, 2.0000000000000000,
     1.0000000000000000, 0.10000000000000000, 1.0000000000000000, 0.20000000000000000, 0.50000000000000000, 0.010000000000000000, 10.000000000000000, 1,
     9438.1696490825737, 529.05454718270453, 9438.1696490825737, 529.05454718270453,
     946.45346370039806, 7.9270442639677400,
     0.50000000000000000, 0.0, 2.7182818284590452},
    {"free_long", 0, 0.0,
     2.0000000000000000, 0.25000000000000000, 1.1250000000000000, 0.074218750000000000, 0.19947114020071640, 1.0000000000000000, 1.0000000000000000, 1,
     4648.4559478987424, 241.38717627763222, 4648.4559478987424, 241.38717627763222,
     1178.8920991725469, 31.864810715213314,
     0.25000000000000000, 1.0000000000000000, 1.1331484530668263},
};

}  // namespace semisplit_test
