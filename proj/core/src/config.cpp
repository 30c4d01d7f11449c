#include "tsc/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace tsc::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + value + "'");
  }
}

std::vector<std::size_t> parse_dim_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  if (trim(value).empty()) return out;
  std::stringstream ss(value);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const long long v = parse_int(key, trim(cell));
    if (v <= 0) throw ConfigError(key + ": dims must be positive, got " + std::to_string(v));
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::string dim_list_str(const std::vector<std::size_t>& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (total_steps < 0) throw ConfigError("total_steps: must be >= 0");
  if (eval_interval < 1) throw ConfigError("eval_interval: must be >= 1");
  if (batch_source == 0) throw ConfigError("batch_source: must be >= 1");
  if (batch_target == 0) throw ConfigError("batch_target: must be >= 1");
  try {
    dataset.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("dataset: ") + e.what());
  }
  if (batch_source > dataset.n_source) {
    throw ConfigError("batch_source: exceeds dataset.n_source");
  }
  if (batch_target > dataset.n_target) {
    throw ConfigError("batch_target: exceeds dataset.n_target");
  }
  if (arch.feature_dim == 0) throw ConfigError("arch.feature_dim: must be >= 1");
  for (std::size_t h : arch.feature_hidden) {
    if (h == 0) throw ConfigError("arch.feature_hidden: dims must be positive");
  }
  for (std::size_t h : arch.disc_hidden) {
    if (h == 0) throw ConfigError("arch.disc_hidden: dims must be positive");
  }
  if (weights.lambda < 0.0) throw ConfigError("weights.lambda: must be >= 0");
  if (weights.beta < 0.0) throw ConfigError("weights.beta: must be >= 0");
  if (!(optimizer.lr > 0.0)) throw ConfigError("optimizer.lr: must be > 0");
  if (optimizer.momentum < 0.0 || optimizer.momentum >= 1.0) {
    throw ConfigError("optimizer.momentum: must be in [0, 1)");
  }
  if (optimizer.weight_decay < 0.0) throw ConfigError("optimizer.weight_decay: must be >= 0");
  if (!(schedule_delta > 0.0)) throw ConfigError("schedule.delta: must be > 0");
}

nn::MlpSpec ExperimentConfig::feature_spec() const {
  return nn::MlpSpec{data::kFeatureDim, arch.feature_hidden, arch.feature_dim, arch.activation,
                     nn::FinalActivation::kNone};
}

nn::MlpSpec ExperimentConfig::classifier_spec() const {
  return nn::MlpSpec{arch.feature_dim, {}, static_cast<std::size_t>(dataset.classes),
                     arch.activation, nn::FinalActivation::kNone};
}

nn::MlpSpec ExperimentConfig::discriminator_spec() const {
  const std::size_t d_in = teacher_variant == nn::TeacherVariant::kDann
                               ? arch.feature_dim
                               : arch.feature_dim * static_cast<std::size_t>(dataset.classes);
  return nn::MlpSpec{d_in, arch.disc_hidden, 1, arch.activation, nn::FinalActivation::kSigmoid};
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, bool> seen;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                        line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (seen[key]) throw ConfigError(key + ": duplicate key");
    seen[key] = true;

    if (key == "mode") {
      if (value == "tsc") cfg.mode = RunMode::kTsc;
      else if (value == "teacher-only") cfg.mode = RunMode::kTeacherOnly;
      else throw ConfigError("mode: expected tsc | teacher-only, got '" + value + "'");
    } else if (key == "seed") {
      cfg.seed = parse_u64(key, value);
    } else if (key == "total_steps") {
      cfg.total_steps = static_cast<int>(parse_int(key, value));
    } else if (key == "eval_interval") {
      cfg.eval_interval = static_cast<int>(parse_int(key, value));
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "batch_source") {
      cfg.batch_source = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "batch_target") {
      cfg.batch_target = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "dataset.kind") {
      if (value == "two-moons-rotation") cfg.dataset.kind = data::DatasetKind::kTwoMoonsRotation;
      else if (value == "gaussian-blobs-shift")
        cfg.dataset.kind = data::DatasetKind::kGaussianBlobsShift;
      else
        throw ConfigError(
            "dataset.kind: expected two-moons-rotation | gaussian-blobs-shift, got '" + value +
            "'");
    } else if (key == "dataset.n_source") {
      cfg.dataset.n_source = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "dataset.n_target") {
      cfg.dataset.n_target = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "dataset.shift") {
      cfg.dataset.shift_param = parse_double(key, value);
    } else if (key == "dataset.noise") {
      cfg.dataset.noise = parse_double(key, value);
    } else if (key == "dataset.classes") {
      cfg.dataset.classes = static_cast<int>(parse_int(key, value));
    } else if (key == "teacher.variant") {
      if (value == "dann") cfg.teacher_variant = nn::TeacherVariant::kDann;
      else if (value == "cdan") cfg.teacher_variant = nn::TeacherVariant::kCdan;
      else throw ConfigError("teacher.variant: expected dann | cdan, got '" + value + "'");
    } else if (key == "arch.feature_hidden") {
      cfg.arch.feature_hidden = parse_dim_list(key, value);
    } else if (key == "arch.feature_dim") {
      cfg.arch.feature_dim = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "arch.disc_hidden") {
      cfg.arch.disc_hidden = parse_dim_list(key, value);
    } else if (key == "arch.activation") {
      if (value == "relu") cfg.arch.activation = nn::Activation::kRelu;
      else if (value == "tanh") cfg.arch.activation = nn::Activation::kTanh;
      else throw ConfigError("arch.activation: expected relu | tanh, got '" + value + "'");
    } else if (key == "weights.lambda") {
      cfg.weights.lambda = parse_double(key, value);
    } else if (key == "weights.beta") {
      cfg.weights.beta = parse_double(key, value);
    } else if (key == "optimizer.lr") {
      cfg.optimizer.lr = parse_double(key, value);
    } else if (key == "optimizer.momentum") {
      cfg.optimizer.momentum = parse_double(key, value);
    } else if (key == "optimizer.weight_decay") {
      cfg.optimizer.weight_decay = parse_double(key, value);
    } else if (key == "schedule.delta") {
      cfg.schedule_delta = parse_double(key, value);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  cfg.dataset.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "mode = " << (cfg.mode == RunMode::kTsc ? "tsc" : "teacher-only") << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "total_steps = " << cfg.total_steps << "\n";
  out << "eval_interval = " << cfg.eval_interval << "\n";
  out << "output_dir = " << cfg.output_dir << "\n";
  out << "batch_source = " << cfg.batch_source << "\n";
  out << "batch_target = " << cfg.batch_target << "\n";
  out << "dataset.kind = "
      << (cfg.dataset.kind == data::DatasetKind::kTwoMoonsRotation ? "two-moons-rotation"
                                                                   : "gaussian-blobs-shift")
      << "\n";
  out << "dataset.n_source = " << cfg.dataset.n_source << "\n";
  out << "dataset.n_target = " << cfg.dataset.n_target << "\n";
  out << "dataset.shift = " << fmt_double(cfg.dataset.shift_param) << "\n";
  out << "dataset.noise = " << fmt_double(cfg.dataset.noise) << "\n";
  out << "dataset.classes = " << cfg.dataset.classes << "\n";
  out << "teacher.variant = "
      << (cfg.teacher_variant == nn::TeacherVariant::kDann ? "dann" : "cdan") << "\n";
  out << "arch.feature_hidden = " << dim_list_str(cfg.arch.feature_hidden) << "\n";
  out << "arch.feature_dim = " << cfg.arch.feature_dim << "\n";
  out << "arch.disc_hidden = " << dim_list_str(cfg.arch.disc_hidden) << "\n";
  out << "arch.activation = "
      << (cfg.arch.activation == nn::Activation::kRelu ? "relu" : "tanh") << "\n";
  out << "weights.lambda = " << fmt_double(cfg.weights.lambda) << "\n";
  out << "weights.beta = " << fmt_double(cfg.weights.beta) << "\n";
  out << "optimizer.lr = " << fmt_double(cfg.optimizer.lr) << "\n";
  out << "optimizer.momentum = " << fmt_double(cfg.optimizer.momentum) << "\n";
  out << "optimizer.weight_decay = " << fmt_double(cfg.optimizer.weight_decay) << "\n";
  out << "schedule.delta = " << fmt_double(cfg.schedule_delta) << "\n";
  return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::stringstream ss(serialize_config(cfg));
  std::string line, canonical;
  while (std::getline(ss, line)) {
    if (line.rfind("output_dir = ", 0) == 0) continue;
    canonical += line;
    canonical += '\n';
  }
  return rng::fnv1a64(canonical);
}

std::string config_hash_hex(const ExperimentConfig& cfg) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

}  // namespace tsc::harness
