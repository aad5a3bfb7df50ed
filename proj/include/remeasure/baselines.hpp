#pragma once

#include "remeasure/model.hpp"
#include "remeasure/regression.hpp"

namespace remeasure {

// Comparison procedures. Each regresses y on a case indicator plus covariates
// by ordinary least squares and t-tests the indicator coefficient.

/// Batch-2 samples only (cases and remeasured controls).
TestResult fit_batch2(const Dataset& data);

/// Original measurements (C1 and T2) with the batch effect ignored; the
/// remeasurements are left out.
TestResult fit_ignore(const Dataset& data);

/// All rows with a batch indicator, pairing ignored.
TestResult fit_naive(const Dataset& data);

/// Location-scale matching of batch-1 controls onto batch 2, with the scale
/// ratio estimated from the remeasured samples (S1 vs C2).
TestResult fit_ls(const Dataset& data);

/// As fit_ls but the batch-1 scale comes from all batch-1 controls.
TestResult fit_lsind(const Dataset& data);

/// Batch-1 control responses after location-scale adjustment.
VectorXd location_scale_adjust(const Dataset& data, bool use_all_controls);

}  // namespace remeasure
