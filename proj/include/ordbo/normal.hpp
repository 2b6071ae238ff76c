#pragma once

// Standard normal helpers with tail-accurate log-domain evaluation.

namespace ordbo::normal {

double pdf(double z);
double log_pdf(double z);
double cdf(double z);

/// log Phi(z), accurate deep into the lower tail (no underflow to -inf for finite z).
double log_cdf(double z);

/// log(Phi(upper) - Phi(lower)) for upper > lower; either bound may be infinite.
double log_cdf_diff(double upper, double lower);

}  // namespace ordbo::normal
