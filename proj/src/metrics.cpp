#include "condkit/metrics.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <regex>
#include <vector>

#include "condkit/error.hpp"

namespace condkit {

namespace {

void requireSameShape(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::ShapeMismatch,
                std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                    std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

std::vector<double> gaussianKernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const int radius = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double x = i - radius;
    k[static_cast<std::size_t>(i)] = std::exp(-0.5 * x * x / (sigma * sigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable filter keeping only positions where the window fits entirely.
std::vector<double> filterValid(const std::vector<double>& src, int w, int h,
                                const std::vector<double>& k) {
  const int size = static_cast<int>(k.size());
  const int ow = w - size + 1;
  const int oh = h - size + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < size; ++i) {
        acc += k[static_cast<std::size_t>(i)] * src[static_cast<std::size_t>(y) * w + x + i];
      }
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < size; ++i) {
        acc += k[static_cast<std::size_t>(i)] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      }
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  requireSameShape(a, b);
  const auto da = a.data();
  const auto db = b.data();
  if (da.empty()) throw Error(ErrorCode::TooSmall, "PSNR of empty images");
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = da[i] - db[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(da.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

double ssim(const Image& a, const Image& b, const SsimOptions& options) {
  requireSameShape(a, b);
  if (a.width() < options.window || a.height() < options.window) {
    throw Error(ErrorCode::TooSmall, "SSIM needs images at least " +
                                         std::to_string(options.window) + " pixels on each side");
  }
  const int w = a.width();
  const int h = a.height();
  const auto kernel = gaussianKernel(options.window, options.sigma);
  const double c1 = options.k1 * options.k1;
  const double c2 = options.k2 * options.k2;
  const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);

  double total = 0.0;
  for (int c = 0; c < Image::channels(); ++c) {
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = a.data()[i * 3 + static_cast<std::size_t>(c)];
      y[i] = b.data()[i * 3 + static_cast<std::size_t>(c)];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filterValid(x, w, h, kernel);
    const auto my = filterValid(y, w, h, kernel);
    const auto mxx = filterValid(xx, w, h, kernel);
    const auto myy = filterValid(yy, w, h, kernel);
    const auto mxy = filterValid(xy, w, h, kernel);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = mxx[i] - mx[i] * mx[i];
      const double vy = myy[i] - my[i] * my[i];
      const double cov = mxy[i] - mx[i] * my[i];
      sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / Image::channels();
}

namespace {

std::string replaceAll(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

std::string shellQuote(const std::string& s) { return "'" + replaceAll(s, "'", "'\\''") + "'"; }

std::mutex& lpipsMutex() {
  static std::mutex m;
  return m;
}

}  // namespace

double lpipsExternal(const Image& a, const Image& b, const std::string& commandTemplate) {
  requireSameShape(a, b);
  const std::lock_guard lock(lpipsMutex());

  static std::atomic<unsigned> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("condkit-lpips-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(dir);
  struct Cleanup {
    std::filesystem::path dir;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(dir, ec);
    }
  } cleanup{dir};

  const auto pa = dir / "a.png";
  const auto pb = dir / "b.png";
  writePng(a, pa);
  writePng(b, pb);
  const std::string command = replaceAll(replaceAll(commandTemplate, "{a}", shellQuote(pa.string())),
                                         "{b}", shellQuote(pb.string()));

  FILE* pipe = ::popen((command + " 2>/dev/null").c_str(), "r");
  if (pipe == nullptr) throw Error(ErrorCode::ExternalUnavailable, "cannot spawn: " + command);
  std::string output;
  std::array<char, 512> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) output += buf.data();
  const int status = ::pclose(pipe);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) == 127 ||
      WEXITSTATUS(status) == 126) {
    throw Error(ErrorCode::ExternalUnavailable, "LPIPS command not runnable: " + command);
  }
  if (WEXITSTATUS(status) != 0) {
    throw Error(ErrorCode::ExternalUnavailable,
                "LPIPS command exited with status " + std::to_string(WEXITSTATUS(status)));
  }
  static const std::regex number(R"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)");
  std::string last;
  for (auto it = std::sregex_iterator(output.begin(), output.end(), number);
       it != std::sregex_iterator(); ++it) {
    last = it->str();
  }
  if (last.empty()) throw Error(ErrorCode::ParseFailure, "LPIPS command printed no number");
  return std::stod(last);
}

}  // namespace condkit
