#include "affect/audio/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "affect/audio/fft.hpp"
#include "affect/core/error.hpp"
#include "affect/simd/kernels.hpp"

namespace affect::audio {

namespace {

// numpy-style "reflect" padding index (edge sample not repeated), extended
// periodically for pads longer than the signal.
std::size_t reflect_index(std::ptrdiff_t idx, std::size_t len) {
  if (len == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (len - 1));
  std::ptrdiff_t m = idx % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(len)) m = period - m;
  return static_cast<std::size_t>(m);
}

void check_stft_params(std::size_t n_fft, std::size_t hop) {
  if (!is_power_of_two(n_fft) || n_fft < 2) {
    throw ConfigError("n_fft must be a power of two >= 2, got " + std::to_string(n_fft));
  }
  if (hop == 0 || hop > n_fft) {
    throw ConfigError("hop must be in (0, n_fft], got " + std::to_string(hop));
  }
}

double energy(std::span<const double> x) { return simd::sum_squares(x); }

}  // namespace

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

ComplexSpectrogram stft(std::span<const double> signal, std::size_t n_fft, std::size_t hop) {
  check_stft_params(n_fft, hop);
  if (signal.empty()) throw DataError("stft: empty signal");
  const FftPlan plan(n_fft);
  const auto window = hann_window(n_fft);

  ComplexSpectrogram spec;
  spec.n_fft = n_fft;
  spec.hop = hop;
  spec.n_bins = n_fft / 2 + 1;
  spec.n_frames = signal.size() / hop + 1;
  spec.re.resize(spec.n_bins * spec.n_frames);
  spec.im.resize(spec.n_bins * spec.n_frames);

  std::vector<double> frame(n_fft);
  std::vector<double> re(n_fft);
  std::vector<double> im(n_fft);
  const auto half = static_cast<std::ptrdiff_t>(n_fft / 2);
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    const auto start = static_cast<std::ptrdiff_t>(t * hop) - half;
    for (std::size_t n = 0; n < n_fft; ++n) {
      frame[n] = signal[reflect_index(start + static_cast<std::ptrdiff_t>(n), signal.size())];
    }
    simd::mul(frame, window, re);
    std::fill(im.begin(), im.end(), 0.0);
    plan.forward(re, im);
    std::copy_n(re.begin(), spec.n_bins, spec.re.begin() + static_cast<std::ptrdiff_t>(t * spec.n_bins));
    std::copy_n(im.begin(), spec.n_bins, spec.im.begin() + static_cast<std::ptrdiff_t>(t * spec.n_bins));
  }
  return spec;
}

std::vector<double> istft(const ComplexSpectrogram& spec, std::size_t length) {
  const std::size_t n = spec.n_fft;
  const FftPlan plan(n);
  const auto window = hann_window(n);
  const std::size_t padded_len = n + spec.hop * (spec.n_frames - 1);
  std::vector<double> acc(padded_len, 0.0);
  std::vector<double> wsum(padded_len, 0.0);
  std::vector<double> re(n);
  std::vector<double> im(n);
  std::vector<double> windowed(n);
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    const std::size_t base = t * spec.n_bins;
    for (std::size_t k = 0; k < spec.n_bins; ++k) {
      re[k] = spec.re[base + k];
      im[k] = spec.im[base + k];
    }
    im[0] = 0.0;
    im[n / 2] = 0.0;
    for (std::size_t k = spec.n_bins; k < n; ++k) {
      re[k] = re[n - k];
      im[k] = -im[n - k];
    }
    plan.inverse(re, im);
    simd::mul(re, window, windowed);
    const std::size_t off = t * spec.hop;
    for (std::size_t i = 0; i < n; ++i) {
      acc[off + i] += windowed[i];
      wsum[off + i] += window[i] * window[i];
    }
  }
  std::vector<double> out(length, 0.0);
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < length && i + half < padded_len; ++i) {
    const double w = wsum[i + half];
    out[i] = w > 1e-12 ? acc[i + half] / w : 0.0;
  }
  return out;
}

Matrix stft_power(std::span<const double> samples, std::size_t n_fft, std::size_t hop) {
  check_stft_params(n_fft, hop);
  if (samples.size() < hop) {
    throw DataError("stft_power: segment of " + std::to_string(samples.size()) +
                    " samples is shorter than hop " + std::to_string(hop));
  }
  const auto spec = stft(samples, n_fft, hop);
  std::vector<double> frame_major(spec.re.size());
  simd::power(spec.re, spec.im, frame_major);
  Matrix out(spec.n_bins, spec.n_frames);
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    for (std::size_t k = 0; k < spec.n_bins; ++k) out(k, t) = frame_major[t * spec.n_bins + k];
  }
  return out;
}

Matrix stft_power(const AudioSegment& seg, std::size_t n_fft, std::size_t hop) {
  return stft_power(std::span<const double>(seg.samples), n_fft, hop);
}

AudioBuffer trim_silence(const AudioBuffer& buf, double gate_db, double min_silence_ms,
                         std::size_t frame_length) {
  if (!(gate_db < 0.0)) throw ConfigError("trim_silence: gate_db must be negative");
  if (!(min_silence_ms > 0.0)) throw ConfigError("trim_silence: min_silence_ms must be positive");
  if (frame_length == 0) throw ConfigError("trim_silence: frame_length must be positive");
  if (buf.samples.empty()) return buf;

  const std::span<const double> x(buf.samples);
  const std::size_t n_frames = (x.size() + frame_length - 1) / frame_length;
  auto frame = [&](std::size_t f) {
    const std::size_t begin = f * frame_length;
    return x.subspan(begin, std::min(frame_length, x.size() - begin));
  };

  std::vector<double> rms(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const auto fr = frame(f);
    rms[f] = std::sqrt(energy(fr) / static_cast<double>(fr.size()));
  }
  const auto loudest = static_cast<std::size_t>(std::max_element(rms.begin(), rms.end()) - rms.begin());
  const double peak = rms[loudest];
  const double threshold = peak * std::pow(10.0, gate_db / 20.0);
  const double min_run = min_silence_ms * buf.sample_rate_hz / 1000.0;

  std::vector<bool> keep(n_frames, true);
  std::size_t f = 0;
  while (f < n_frames) {
    const bool quiet = peak == 0.0 || rms[f] < threshold;
    if (!quiet) {
      ++f;
      continue;
    }
    std::size_t end = f;
    std::size_t run_samples = 0;
    while (end < n_frames && (peak == 0.0 || rms[end] < threshold)) {
      run_samples += frame(end).size();
      ++end;
    }
    if (static_cast<double>(run_samples) > min_run) {
      for (std::size_t i = f; i < end; ++i) keep[i] = false;
    }
    f = end;
  }

  AudioBuffer out;
  out.sample_rate_hz = buf.sample_rate_hz;
  out.samples.reserve(x.size());
  for (std::size_t i = 0; i < n_frames; ++i) {
    if (keep[i]) {
      const auto fr = frame(i);
      out.samples.insert(out.samples.end(), fr.begin(), fr.end());
    }
  }
  if (out.samples.empty()) {
    const auto fr = frame(loudest);
    out.samples.assign(fr.begin(), fr.end());
  }
  return out;
}

AudioBuffer spectral_gate(const AudioBuffer& buf, double reduction_db, std::size_t n_fft,
                          std::size_t hop) {
  if (!(reduction_db >= 0.0)) throw ConfigError("spectral_gate: reduction_db must be >= 0");
  check_stft_params(n_fft, hop);
  if (buf.samples.size() < n_fft) return buf;

  auto spec = stft(buf.samples, n_fft, hop);
  const std::size_t bins = spec.n_bins;
  const std::size_t frames = spec.n_frames;

  std::vector<double> mag(spec.re.size());
  simd::power(spec.re, spec.im, mag);
  std::vector<double> frame_energy(frames, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    frame_energy[t] = std::accumulate(mag.begin() + static_cast<std::ptrdiff_t>(t * bins),
                                      mag.begin() + static_cast<std::ptrdiff_t>((t + 1) * bins), 0.0);
  }
  for (double& m : mag) m = std::sqrt(m);

  std::vector<std::size_t> order(frames);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frame_energy[a] < frame_energy[b]; });
  const std::size_t n_quiet = std::max<std::size_t>(1, (frames + 9) / 10);

  std::vector<double> floor(bins, 0.0);
  for (std::size_t q = 0; q < n_quiet; ++q) {
    const std::size_t t = order[q];
    for (std::size_t k = 0; k < bins; ++k) floor[k] += mag[t * bins + k];
  }
  for (double& v : floor) v /= static_cast<double>(n_quiet);

  std::vector<double> sorted = floor;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(bins / 2), sorted.end());
  const double cap = 4.0 * sorted[bins / 2];
  for (double& v : floor) v = std::min(v, cap);

  const double over = std::pow(10.0, reduction_db / 20.0);
  const double gain = 1.0 / over;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) {
      const std::size_t i = t * bins + k;
      if (mag[i] <= floor[k] * over) {
        spec.re[i] *= gain;
        spec.im[i] *= gain;
      }
    }
  }

  AudioBuffer out;
  out.sample_rate_hz = buf.sample_rate_hz;
  out.samples = istft(spec, buf.samples.size());
  const double e_in = energy(buf.samples);
  const double e_out = energy(out.samples);
  if (e_out > e_in) {
    const double s = e_in > 0.0 ? std::sqrt(e_in / e_out) : 0.0;
    for (double& v : out.samples) v *= s;
  }
  for (double& v : out.samples) v = std::clamp(v, -1.0, 1.0);
  return out;
}

std::vector<AudioSegment> segment(const AudioBuffer& buf, double seg_seconds) {
  if (!(seg_seconds > 0.0)) throw ConfigError("segment: seg_seconds must be positive");
  if (buf.samples.empty()) throw DataError("segment: empty buffer");
  const auto seg_len = static_cast<std::size_t>(std::llround(seg_seconds * buf.sample_rate_hz));
  if (seg_len == 0) throw ConfigError("segment: window shorter than one sample");
  const std::size_t n = buf.samples.size();
  const std::size_t count = (n + seg_len - 1) / seg_len;
  std::vector<AudioSegment> out(count);
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t begin = s * seg_len;
    const std::size_t take = std::min(seg_len, n - begin);
    auto& seg = out[s];
    seg.samples.assign(seg_len, 0.0);
    std::copy_n(buf.samples.begin() + static_cast<std::ptrdiff_t>(begin), take, seg.samples.begin());
    seg.pad_count = seg_len - take;
    seg.sample_rate_hz = buf.sample_rate_hz;
    seg.index = s;
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank build_mel_filterbank(std::uint32_t sample_rate_hz, std::size_t n_mels, std::size_t n_fft,
                                   double fmin_hz, double fmax_hz) {
  if (sample_rate_hz == 0) throw ConfigError("mel filterbank: sample rate is zero");
  if (n_mels < 2) throw ConfigError("mel filterbank: n_mels must be >= 2");
  if (n_fft < 2) throw ConfigError("mel filterbank: n_fft must be >= 2");
  const double nyquist = sample_rate_hz / 2.0;
  if (fmax_hz < 0.0) fmax_hz = nyquist;
  if (!(fmin_hz >= 0.0 && fmin_hz < fmax_hz && fmax_hz <= nyquist)) {
    throw ConfigError("mel filterbank: need 0 <= fmin < fmax <= sr/2");
  }

  const std::size_t n_bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(fmin_hz);
  const double mel_hi = hz_to_mel(fmax_hz);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }

  MelFilterbank fb;
  fb.weights = Matrix(n_mels, n_bins);
  fb.fmin_hz = fmin_hz;
  fb.fmax_hz = fmax_hz;
  fb.sample_rate_hz = sample_rate_hz;
  fb.n_fft = n_fft;
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m];
    const double center = edges[m + 1];
    const double hi = edges[m + 2];
    bool any = false;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate_hz / static_cast<double>(n_fft);
      const double up = (f - lo) / (center - lo);
      const double down = (hi - f) / (hi - center);
      const double w = std::max(0.0, std::min(up, down));
      fb.weights(m, k) = w;
      any = any || w > 0.0;
    }
    if (!any) {
      throw ConfigError("mel filterbank: band " + std::to_string(m) +
                        " covers no FFT bin; band too narrow for " + std::to_string(n_mels) + " mels");
    }
  }
  return fb;
}

LogMelSpectrogram log_mel(const Matrix& power, const MelFilterbank& fb, double floor) {
  if (power.rows() != fb.weights.cols()) {
    throw ShapeError("log_mel: power has " + std::to_string(power.rows()) + " bins, filterbank expects " +
                     std::to_string(fb.weights.cols()));
  }
  if (!(floor > 0.0)) throw ConfigError("log_mel: floor must be positive");
  const Matrix frames = power.transposed();
  LogMelSpectrogram out;
  out.values = Matrix(fb.n_mels(), power.cols());
  out.meta.n_fft = fb.n_fft;
  for (std::size_t m = 0; m < fb.n_mels(); ++m) {
    const auto w = fb.weights.row(m);
    for (std::size_t t = 0; t < frames.rows(); ++t) {
      out.values(m, t) = std::log(std::max(simd::dot(w, frames.row(t)), floor));
    }
  }
  return out;
}

template <typename Range, typename Get>
NormStats fit_pooled(const Range& corpus, Get get) {
  if (corpus.empty()) throw DataError("fit_norm_stats: empty corpus");
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& item : corpus) {
    const Matrix& m = get(item);
    for (double v : m.values()) sum += v;
    count += m.size();
  }
  if (count == 0) throw DataError("fit_norm_stats: corpus has no entries");
  const double mean = sum / static_cast<double>(count);
  double ss = 0.0;
  for (const auto& item : corpus) {
    for (double v : get(item).values()) ss += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(count));
  if (!(sd > 0.0) || !std::isfinite(sd)) throw DataError("fit_norm_stats: zero-variance corpus");
  return {mean, sd};
}

NormStats fit_norm_stats(std::span<const Matrix> corpus) {
  return fit_pooled(corpus, [](const Matrix& m) -> const Matrix& { return m; });
}

NormStats fit_norm_stats(std::span<const LogMelSpectrogram> corpus) {
  return fit_pooled(corpus, [](const LogMelSpectrogram& s) -> const Matrix& { return s.values; });
}

Matrix standardize(const Matrix& m, const NormStats& stats) {
  if (!(stats.std > 0.0)) throw ConfigError("standardize: std must be positive");
  Matrix out = m;
  for (double& v : out.values()) v = (v - stats.mean) / stats.std;
  return out;
}

LogMelSpectrogram standardize(const LogMelSpectrogram& s, const NormStats& stats) {
  return {standardize(s.values, stats), s.meta};
}

}  // namespace affect::audio
