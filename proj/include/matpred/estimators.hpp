#pragma once

#include <vector>

#include "matpred/sampling.hpp"

namespace matpred {

// Efron-Morris: {I - (q-r-1) v_x (X X^T)^-1} X. Needs q >= r + 2.
MeanMatrix em_estimate(const MeanMatrix& x, double v_x);

// James-Stein type: {1 - (qr-2) v_x / tr(X X^T)} X, no positive part.
MeanMatrix js_estimate(const MeanMatrix& x, double v_x);

// X - v_x {H diag(alpha_i / l_i) H^T + beta / tr(X X^T) I} X, where
// X X^T = H diag(l) H^T with l_1 >= ... >= l_r.
MeanMatrix ms_estimate(const MeanMatrix& x, double v_x, const std::vector<double>& alphas,
                       double beta);

}  // namespace matpred
