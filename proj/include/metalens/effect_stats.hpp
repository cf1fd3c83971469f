#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metalens {

/// Scale on which standard errors, Z-scores and pooling are computed.
/// RawRR works on the risk ratio itself (null value 1); LogRR on ln(RR)
/// (null value 0).
enum class Scale { RawRR, LogRR };

std::string_view to_string(Scale scale);
/// Accepts "raw" / "log" (and the enum spellings).
Scale parse_scale(std::string_view text);

/// One base study's reported risk ratio with its confidence limits.
struct EffectEstimate {
  std::string id;
  std::string label;
  double rr = 1.0;
  double cl_low = 1.0;
  double cl_high = 1.0;
  double confidence_level = 0.95;
  std::string note;  // free-text flag carried into reports, e.g. non-independence
};

/// Throws ValidationError naming e.id when an EffectEstimate invariant fails.
void validate(const EffectEstimate& e);

/// Derived statistics for one study.
struct PValueRecord {
  std::string id;
  double se = 0.0;
  double z = 0.0;
  double p = 1.0;
  int rank = 0;  // 1-based, ascending p
};

/// Standard normal CDF.
double normal_cdf(double x);

/// Two-sided critical value Phi^-1(1 - (1 - level)/2), found by bisection on
/// normal_cdf so that arbitrary confidence levels are supported.
double z_critical(double confidence_level);

/// Effect expressed on the given scale (rr or ln rr).
double effect_on_scale(double rr, Scale scale);

/// Width of the confidence interval divided by 2 * z_critical.
double se_from_ci(const EffectEstimate& e, Scale scale);

/// Displacement from the null (RR = 1) in standard-error units.
double z_score(const EffectEstimate& e, double se, Scale scale);

/// 2 * (1 - Phi(|z|)), clamped to [smallest positive normal double, 1].
double p_two_sided(double z);

/// Full table pipeline: SE, Z, p per study and ranks by ascending p (stable
/// by input order). Output order matches input order. `confidence_level`
/// overrides each estimate's own level.
std::vector<PValueRecord> derive_records(std::span<const EffectEstimate> studies, Scale scale,
                                         double confidence_level = 0.95);

}  // namespace metalens
