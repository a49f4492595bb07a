#pragma once

#include "tabpower/table.hpp"

namespace tabpower {

// Population functionals. Both are zero exactly when the table is the
// product of its marginals.
double pearson_functional(const JointTable& table);
double dcov_functional(const JointTable& table);

// Same functionals on a raw cell matrix with marginals recomputed from the
// cells. Used by the differentiation code, which perturbs cells directly.
double pearson_functional_raw(const Matrix& probs);
double dcov_functional_raw(const Matrix& probs);

// Sample statistics (unscaled; multiply by n for the usual test statistics).
double stat_pearson(const CountTable& counts);
double stat_dcov_mle(const CountTable& counts);
double stat_dcov_unbiased(const CountTable& counts);  // requires n >= 4

// The five-term unbiased-estimator formula evaluated at an arbitrary
// probability table with the given n. stat_dcov_unbiased(counts) equals
// dcov_unbiased_at(mle_table(counts), counts.n()).
double dcov_unbiased_at(const JointTable& table, double n);

// Almost-sure limit of n * (dcov_mle - dcov_unbiased). Under independence
// this reduces to (1 - sum pi_i+^2)(1 - sum pi_+j^2).
double lemma1_constant(const JointTable& table);

}  // namespace tabpower
