#include "splitopt/bench/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace splitopt::bench {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size())
    throw std::invalid_argument(key + ": expected a number, got '" + value + "'");
  return out;
}

long long to_integer(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size())
    throw std::invalid_argument(key + ": expected an integer, got '" + value + "'");
  return out;
}

}  // namespace

DatasetSpec DatasetSpec::parse(const std::string& text) {
  DatasetSpec spec;
  if (text.rfind("synth", 0) == 0) {
    spec.kind = Kind::Synthetic;
    const auto colon = text.find(':');
    if (colon == std::string::npos) return spec;
    for (const auto& item : split(text.substr(colon + 1), ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("dataset: expected key=value in '" + item + "'");
      const std::string key = trim(item.substr(0, eq));
      const std::string value = trim(item.substr(eq + 1));
      if (key == "n_per_class") spec.blobs.n_per_class = static_cast<int>(to_integer(key, value));
      else if (key == "classes") spec.blobs.n_classes = static_cast<int>(to_integer(key, value));
      else if (key == "dim") spec.blobs.dim = static_cast<int>(to_integer(key, value));
      else if (key == "separation") spec.blobs.separation = to_double(key, value);
      else if (key == "seed") spec.blobs.seed = static_cast<std::uint64_t>(to_integer(key, value));
      else throw std::invalid_argument("dataset: unknown synthetic key '" + key + "'");
    }
    return spec;
  }
  if (text.rfind("idx:", 0) == 0) {
    const auto parts = split(text.substr(4), ',');
    if (parts.size() != 4)
      throw std::invalid_argument(
          "dataset: idx needs train-images,train-labels,test-images,test-labels");
    spec.kind = Kind::Idx;
    spec.train_images = parts[0];
    spec.train_labels = parts[1];
    spec.test_images = parts[2];
    spec.test_labels = parts[3];
    return spec;
  }
  throw std::invalid_argument("dataset: expected synth:... or idx:..., got '" + text + "'");
}

std::string DatasetSpec::to_string() const {
  std::ostringstream os;
  if (kind == Kind::Synthetic) {
    os << "synth:n_per_class=" << blobs.n_per_class << ",classes=" << blobs.n_classes
       << ",dim=" << blobs.dim << ",separation=" << blobs.separation << ",seed=" << blobs.seed;
  } else {
    os << "idx:" << train_images.string() << ',' << train_labels.string() << ','
       << test_images.string() << ',' << test_labels.string();
  }
  return os.str();
}

TrainTestData load_data(const DatasetSpec& spec) {
  if (spec.kind == DatasetSpec::Kind::Synthetic) {
    data::BlobSpec test_spec = spec.blobs;
    test_spec.seed += kTestSeedOffset;
    return {data::synth_blobs(spec.blobs), data::synth_blobs(test_spec)};
  }
  TrainTestData out{data::load_idx(spec.train_images, spec.train_labels),
                    data::load_idx(spec.test_images, spec.test_labels)};
  if (out.train.dim() != out.test.dim())
    throw std::runtime_error("train and test images have different sizes");
  const int classes = std::max(out.train.classes, out.test.classes);
  out.train.classes = out.test.classes = classes;
  if (spec.normalize) {
    out.train.images = nn::normalize(out.train.images);
    out.test.images = nn::normalize(out.test.images);
  }
  return out;
}

void ExperimentConfig::validate() const {
  const auto& names = optimizer_names();
  if (std::find(names.begin(), names.end(), optimizer.name) == names.end())
    throw std::invalid_argument("unknown optimizer '" + optimizer.name + "'");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("hidden layer sizes must be >= 1");
}

ExperimentResult run_experiment(const ExperimentConfig& config, const TrainTestData& data) {
  config.validate();
  const data::Dataset& train = data.train;
  const data::Dataset& test = data.test;

  std::vector<int> sizes{static_cast<int>(train.dim())};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(train.classes);
  nn::MlpModel model = nn::MlpModel::initialized(sizes, config.seed);

  ExperimentResult result;
  result.initial_parameters = model.parameters();
  auto optimizer = make_optimizer(config.optimizer, model.parameters());

  const nn::EpochIterator epochs(train.size(), static_cast<std::size_t>(config.batch_size),
                                 config.seed);
  const nn::Batch train_all = train.as_batch();
  const nn::Batch test_all = test.as_batch();

  nn::MlpModel probe = model;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    for (const auto& indices : epochs.batches(static_cast<std::size_t>(epoch - 1))) {
      const nn::Batch batch = train.gather(indices);
      double last_loss = 0.0;
      optimizer->step([&](const Eigen::VectorXd& theta) {
        probe.set_parameters(theta);
        auto lg = probe.forward_backward(batch, config.loss);
        last_loss = lg.loss;
        return lg.gradient;
      });
      if (!std::isfinite(last_loss) || !optimizer->parameters().allFinite()) {
        result.status = RunStatus::Diverged;
        result.message = "non-finite loss in epoch " + std::to_string(epoch) + " at iteration " +
                         std::to_string(optimizer->iterations());
        result.final_parameters = optimizer->parameters();
        return result;
      }
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    model.set_parameters(optimizer->parameters());
    const nn::Evaluation tr = model.evaluate(train_all, config.loss);
    const nn::Evaluation te = model.evaluate(test_all, config.loss);
    if (!std::isfinite(tr.loss) || !std::isfinite(te.loss)) {
      result.status = RunStatus::Diverged;
      result.message = "non-finite evaluation loss after epoch " + std::to_string(epoch);
      result.final_parameters = optimizer->parameters();
      return result;
    }
    result.records.push_back({epoch, tr.loss, tr.accuracy, te.loss, te.accuracy, elapsed});
  }
  result.final_parameters = optimizer->parameters();
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  return run_experiment(config, load_data(config.dataset));
}

ExperimentConfig config_from_settings(const std::map<std::string, std::string>& settings) {
  static const std::vector<std::string> kKeys = {
      "optimizer", "lr",   "k",       "k-schedule", "momentum",    "rho", "eps", "epochs",
      "batch-size", "seed", "dataset", "loss",       "hidden",      "ssa1-update", "out"};
  for (const auto& [key, value] : settings)
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
      throw std::invalid_argument("unknown setting '" + key + "'");

  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = settings.find(key);
    return it == settings.end() ? nullptr : &it->second;
  };

  ExperimentConfig cfg;
  if (const auto* v = get("optimizer")) cfg.optimizer.name = *v;
  else throw std::invalid_argument("optimizer is required");
  cfg.optimizer.lr = default_learning_rate(cfg.optimizer.name);
  if (const auto* v = get("lr")) cfg.optimizer.lr = to_double("lr", *v);
  if (const auto* v = get("k")) cfg.optimizer.k = to_double("k", *v);
  if (const auto* v = get("k-schedule")) {
    if (*v == "constant") cfg.optimizer.k_schedule = KSchedule::Constant;
    else if (*v == "exp-decay") cfg.optimizer.k_schedule = KSchedule::ExponentialDecay;
    else throw std::invalid_argument("k-schedule must be constant or exp-decay");
  }
  if (const auto* v = get("momentum")) cfg.optimizer.momentum = parse_momentum(*v);
  if (const auto* v = get("rho")) cfg.optimizer.rho = to_double("rho", *v);
  if (const auto* v = get("eps")) cfg.optimizer.eps = to_double("eps", *v);
  if (const auto* v = get("ssa1-update")) {
    if (*v == "equation") cfg.optimizer.ssa1_update = Ssa1Update::Equation;
    else if (*v == "pseudocode") cfg.optimizer.ssa1_update = Ssa1Update::PseudocodeCompat;
    else throw std::invalid_argument("ssa1-update must be equation or pseudocode");
  }
  if (const auto* v = get("epochs")) cfg.epochs = static_cast<int>(to_integer("epochs", *v));
  if (const auto* v = get("batch-size"))
    cfg.batch_size = static_cast<int>(to_integer("batch-size", *v));
  if (const auto* v = get("seed")) {
    const long long seed = to_integer("seed", *v);
    if (seed < 0) throw std::invalid_argument("seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (const auto* v = get("dataset")) cfg.dataset = DatasetSpec::parse(*v);
  if (const auto* v = get("loss")) {
    if (*v == "nll") cfg.loss = nn::LossKind::NllOnLogSoftmax;
    else if (*v == "xent") cfg.loss = nn::LossKind::CrossEntropy;
    else throw std::invalid_argument("loss must be nll or xent");
  }
  if (const auto* v = get("hidden")) {
    cfg.hidden.clear();
    for (const auto& part : split(*v, ','))
      if (!part.empty()) cfg.hidden.push_back(static_cast<int>(to_integer("hidden", part)));
  }
  if (const auto* v = get("out")) cfg.out = *v;
  cfg.validate();
  return cfg;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace splitopt::bench
