#include "tsc/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tsc::data {

void DatasetSpec::validate() const {
  if (classes < 2) throw std::invalid_argument("DatasetSpec: classes must be >= 2");
  if (kind == DatasetKind::kTwoMoonsRotation && classes != 2) {
    throw std::invalid_argument("DatasetSpec: two-moons-rotation requires classes == 2");
  }
  if (n_source == 0 || n_target == 0) {
    throw std::invalid_argument("DatasetSpec: domain sizes must be positive");
  }
  if (n_source < static_cast<std::size_t>(classes) ||
      n_target < static_cast<std::size_t>(classes)) {
    throw std::invalid_argument("DatasetSpec: domain sizes must cover every class");
  }
  if (noise < 0.0) throw std::invalid_argument("DatasetSpec: noise must be >= 0");
}

namespace {

// Two interleaved half-circles, centered at the origin. Class 0 is the
// upper arc, class 1 the lower one. Labels alternate so both classes are
// always present.
Domain make_moons(std::size_t n, double noise, rng::Stream& stream, std::string name) {
  Domain dom;
  dom.n = n;
  dom.d = kFeatureDim;
  dom.xs.resize(n * kFeatureDim);
  dom.ys.resize(n);
  dom.name = std::move(name);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const double t = stream.uniform(0.0, std::numbers::pi);
    double x, y;
    if (label == 0) {
      x = std::cos(t) - 0.5;
      y = std::sin(t) - 0.25;
    } else {
      x = 0.5 - std::cos(t);
      y = 0.25 - std::sin(t);
    }
    x += stream.normal(0.0, noise);
    y += stream.normal(0.0, noise);
    dom.xs[i * 2] = x;
    dom.xs[i * 2 + 1] = y;
    dom.ys[i] = label;
  }
  return dom;
}

// K isotropic blobs with centers on a circle of radius 2.5.
Domain make_blobs(std::size_t n, int classes, double noise, rng::Stream& stream,
                  std::string name) {
  constexpr double kRadius = 2.5;
  Domain dom;
  dom.n = n;
  dom.d = kFeatureDim;
  dom.xs.resize(n * kFeatureDim);
  dom.ys.resize(n);
  dom.name = std::move(name);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(classes));
    const double angle = 2.0 * std::numbers::pi * label / classes;
    dom.xs[i * 2] = kRadius * std::cos(angle) + stream.normal(0.0, noise);
    dom.xs[i * 2 + 1] = kRadius * std::sin(angle) + stream.normal(0.0, noise);
    dom.ys[i] = label;
  }
  return dom;
}

void rotate_in_place(Domain& dom, double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  for (std::size_t i = 0; i < dom.n; ++i) {
    const double x = dom.xs[i * 2], y = dom.xs[i * 2 + 1];
    dom.xs[i * 2] = c * x - s * y;
    dom.xs[i * 2 + 1] = s * x + c * y;
  }
}

void translate_in_place(Domain& dom, double magnitude) {
  const double dx = magnitude * std::numbers::sqrt2 / 2.0;
  for (std::size_t i = 0; i < dom.n; ++i) {
    dom.xs[i * 2] += dx;
    dom.xs[i * 2 + 1] += dx;
  }
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::pair<Domain, Domain> generate(const DatasetSpec& spec) {
  spec.validate();
  rng::Stream stream(spec.seed, "generation");
  Domain source, target;
  switch (spec.kind) {
    case DatasetKind::kTwoMoonsRotation:
      source = make_moons(spec.n_source, spec.noise, stream, "source");
      target = make_moons(spec.n_target, spec.noise, stream, "target");
      rotate_in_place(target, spec.shift_param);
      break;
    case DatasetKind::kGaussianBlobsShift:
      source = make_blobs(spec.n_source, spec.classes, spec.noise, stream, "source");
      target = make_blobs(spec.n_target, spec.classes, spec.noise, stream, "target");
      translate_in_place(target, spec.shift_param);
      break;
  }
  return {std::move(source), std::move(target)};
}

EpochSampler::EpochSampler(std::size_t n, std::size_t batch_size, rng::Stream* stream)
    : n_(n), batch_size_(batch_size), cursor_(0), stream_(stream) {
  if (n == 0) throw std::invalid_argument("EpochSampler: empty domain");
  if (batch_size == 0 || batch_size > n) {
    throw std::invalid_argument("EpochSampler: batch size " + std::to_string(batch_size) +
                                " outside [1, " + std::to_string(n) + "]");
  }
  if (stream == nullptr) throw std::invalid_argument("EpochSampler: null stream");
  perm_.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
  stream_->shuffle(perm_);
}

std::vector<std::size_t> EpochSampler::next() {
  if (cursor_ >= n_) {
    stream_->shuffle(perm_);
    cursor_ = 0;
  }
  const std::size_t take = std::min(batch_size_, n_ - cursor_);
  std::vector<std::size_t> out(perm_.begin() + cursor_, perm_.begin() + cursor_ + take);
  cursor_ += take;
  return out;
}

SourceBatch sample_source(const Domain& domain, EpochSampler& sampler) {
  SourceBatch b;
  b.indices = sampler.next();
  b.n = b.indices.size();
  b.d = domain.d;
  b.xs.resize(b.n * b.d);
  b.ys.resize(b.n);
  for (std::size_t i = 0; i < b.n; ++i) {
    const std::size_t src = b.indices[i];
    for (std::size_t j = 0; j < b.d; ++j) b.xs[i * b.d + j] = domain.xs[src * b.d + j];
    b.ys[i] = domain.ys[src];
  }
  return b;
}

TargetBatch sample_target(const Domain& domain, EpochSampler& sampler) {
  TargetBatch b;
  b.indices = sampler.next();
  b.n = b.indices.size();
  b.d = domain.d;
  b.xs.resize(b.n * b.d);
  for (std::size_t i = 0; i < b.n; ++i) {
    const std::size_t src = b.indices[i];
    for (std::size_t j = 0; j < b.d; ++j) b.xs[i * b.d + j] = domain.xs[src * b.d + j];
  }
  return b;
}

void export_csv(const Domain& source, const Domain& target,
                const std::filesystem::path& path) {
  if (source.d != target.d) {
    throw std::invalid_argument("export_csv: source and target dimensions differ");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("export_csv: cannot open " + path.string());
  for (std::size_t j = 0; j < source.d; ++j) out << "x" << j << ",";
  out << "label,domain\n";
  auto write_domain = [&out](const Domain& dom) {
    for (std::size_t i = 0; i < dom.n; ++i) {
      for (std::size_t j = 0; j < dom.d; ++j) out << fmt_double(dom.xs[i * dom.d + j]) << ",";
      out << dom.ys[i] << "," << dom.name << "\n";
    }
  };
  write_domain(source);
  write_domain(target);
  if (!out) throw std::runtime_error("export_csv: write failed for " + path.string());
}

std::pair<Domain, Domain> import_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("import_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("import_csv: empty file " + path.string());

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[header.size() - 2] != "label" || header.back() != "domain") {
    throw std::runtime_error("import_csv: unexpected header in " + path.string());
  }
  const std::size_t d = header.size() - 2;

  Domain source, target;
  source.d = target.d = d;
  source.name = "source";
  target.name = "target";
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != d + 2) {
      throw std::runtime_error("import_csv: bad field count at line " + std::to_string(lineno));
    }
    Domain& dom = cells.back() == "source"   ? source
                  : cells.back() == "target" ? target
                                             : throw std::runtime_error(
                                                   "import_csv: unknown domain '" +
                                                   cells.back() + "' at line " +
                                                   std::to_string(lineno));
    for (std::size_t j = 0; j < d; ++j) dom.xs.push_back(std::stod(cells[j]));
    dom.ys.push_back(std::stoi(cells[d]));
    ++dom.n;
  }
  return {std::move(source), std::move(target)};
}

}  // namespace tsc::data
