// Shannon entropy and exact signature-entropy enumeration.
#pragma once

#include <vector>

#include "entroround/matrix.hpp"

namespace entroround {

// Entropy in bits of a finite distribution. Rejects negative probabilities
// and mass that does not sum to 1 within 1e-9.
double shannon_entropy(const std::vector<double>& probs);

// Exact joint entropy (bits) of the signature vector of a uniform full
// coloring chi in {-1,+1}^m, where row i contributes the key
// round_half_down(A_i chi / (2 delta_i)). Enumerates all 2^m colorings via a
// Gray-code sweep; refuses m > enum_cap.
double exact_joint_entropy(const DenseMatrix& a, const Vec& delta, int enum_cap = 20);

}  // namespace entroround
