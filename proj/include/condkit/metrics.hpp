#pragma once

#include <string>

#include "condkit/image.hpp"

namespace condkit {

/// 10 log10(1 / MSE) with peak 1.0. Identical images give +infinity.
double psnr(const Image& a, const Image& b);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over all fully-contained Gaussian windows, computed per channel
/// and averaged across channels. Requires both dimensions >= window.
double ssim(const Image& a, const Image& b, const SsimOptions& options = {});

/// Runs an external LPIPS scorer. `commandTemplate` is a shell command in
/// which "{a}" and "{b}" are replaced with paths to PNG copies of the two
/// images; the last number printed on stdout is the score.
/// Throws ExternalUnavailable when the command cannot be run and
/// ParseFailure when it prints no number.
double lpipsExternal(const Image& a, const Image& b, const std::string& commandTemplate);

}  // namespace condkit
