#pragma once

#include <initializer_list>

namespace spotvol {

/// (e^{d*dt} - 1) / d, total in d. Below |d*dt| = 1e-4 the direct ratio is
/// replaced by the cubic Taylor polynomial; the two branches agree to better
/// than 1e-12 relative at the switch.
double expint(double d, double dt);

/// Divided differences of d -> e^{d*dt}.
///
/// Writes out[j] = f[nodes[0], ..., nodes[j]] for j = 0..count-1, i.e. the
/// divided difference over every prefix of the node sequence (out[0] is
/// e^{nodes[0]*dt}). Total for any node multiset, including confluent nodes:
/// small scaled spreads go through a Taylor series in complete homogeneous
/// symmetric polynomials, large spreads through the exponential of the
/// associated bidiagonal matrix (Opitz form). Smooth in the nodes either way.
void exp_divdiff_prefixes(const double* nodes, int count, double dt,
                          double* out);

/// Divided difference over one node list (convenience wrapper).
double exp_divdiff(std::initializer_list<double> nodes, double dt);

}  // namespace spotvol
