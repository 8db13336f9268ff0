#pragma once

#include <string>
#include <vector>

#include "seqcast/trainer.hpp"
#include "seqcast/xai.hpp"

namespace seqcast {

// CSV emitters. All numeric payloads use round-trip precision so reruns with
// the same seed produce byte-identical files.

/// `date,y_true,y_pred`, one row per prediction.
std::string predictions_csv(const std::vector<Prediction>& predictions);

/// `epoch,train_loss,test_loss`, epochs numbered from 1.
std::string loss_curve_csv(const std::vector<EpochLoss>& curve);

/// `feature,mean_abs_shap` in the summary's (descending) order.
std::string shap_global_csv(const GlobalSummary& summary);

/// Header records (`method`, `base_value`, `prediction`, `target_date`)
/// followed by `feature,score` rows in the attribution's order. Scores are
/// in normalized-target units.
std::string local_explanation_csv(const Attribution& attribution, const core::Date& target_date);

// Static SVG line charts (self-contained, no external references).

std::string predictions_svg(const std::vector<Prediction>& predictions, const std::string& title);
std::string loss_curve_svg(const std::vector<EpochLoss>& curve, const std::string& title);

}  // namespace seqcast
