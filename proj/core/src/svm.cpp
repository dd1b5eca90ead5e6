#include "relscope/svm.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "relscope/errors.hpp"
#include "relscope/random.hpp"
#include "relscope/tsv.hpp"

namespace relscope {

void FeatureMatrix::push_row(std::span<const double> row) {
  if (rows_ == 0 && data_.empty()) cols_ = row.size();
  if (row.size() != cols_)
    throw ShapeError("row has " + std::to_string(row.size()) + " columns, matrix has " +
                     std::to_string(cols_));
  data_.insert(data_.end(), row.begin(), row.end());
  ++rows_;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Averaging weight exponent for polynomial-decay averaging; 3 approximates
// averaging over the final quarter of the iterates.
constexpr double kAveragingGamma = 3.0;

// Exact minimizer over the unregularized bias for fixed w. The loss is convex
// piecewise linear in b with kinks at s_i - w.x_i; the minimum sits at the
// first kink where the slope turns non-negative.
double optimal_bias(const FeatureMatrix& x, std::span<const int> signs, std::span<const double> w,
                    std::span<const double> weights) {
  std::vector<std::pair<double, double>> kinks;
  kinks.reserve(x.rows());
  double slope = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double c = weights.empty() ? 1.0 : weights[i];
    kinks.emplace_back(signs[i] - dot(w, x.row(i)), c);
    if (signs[i] > 0) slope -= c;
  }
  std::sort(kinks.begin(), kinks.end());
  for (const auto& [at, c] : kinks) {
    slope += c;
    if (slope >= 0.0) return at;
  }
  return kinks.empty() ? 0.0 : kinks.back().first;
}

}  // namespace

double hinge_objective(const FeatureMatrix& x, std::span<const int> signs, std::span<const double> w,
                       double b, double lambda, std::span<const double> weights) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double margin = signs[i] * (dot(w, x.row(i)) + b);
    if (margin < 1.0) loss += (weights.empty() ? 1.0 : weights[i]) * (1.0 - margin);
  }
  return 0.5 * lambda * dot(w, w) + loss / static_cast<double>(x.rows());
}

BinaryModel train_binary(const FeatureMatrix& x, std::span<const int> signs, const SvmConfig& cfg,
                         std::span<const double> weights) {
  if (!(cfg.lambda > 0.0)) throw TrainError("lambda must be positive");
  if (cfg.epochs == 0) throw TrainError("epochs must be positive");
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (n == 0) throw TrainError("no training rows");
  if (signs.size() != n || (!weights.empty() && weights.size() != n))
    throw ShapeError("label or weight count differs from row count");

  const auto weight = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double zero_objective = 0.0;
  double max_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    zero_objective += weight(i);
    max_norm = std::max(max_norm, std::sqrt(dot(x.row(i), x.row(i))));
  }
  zero_objective /= static_cast<double>(n);
  // (lambda/2)|w*|^2 <= J(0,0) bounds the optimum's norm; any bias beyond
  // 1 + max|w.x| leaves one class entirely violated, so the optimum's bias
  // is bounded too.
  const double radius = std::sqrt(2.0 * zero_objective / cfg.lambda);
  const double bias_bound = 1.0 + max_norm * radius;

  std::vector<double> w(d, 0.0);
  double b = 0.0;
  std::vector<double> avg_w(d, 0.0);
  double avg_b = 0.0;

  BinaryModel best;
  best.w.assign(d, 0.0);
  best.b = 0.0;
  best.objective = hinge_objective(x, signs, best.w, best.b, cfg.lambda, weights);
  best.objective_trace.push_back(best.objective);

  Rng rng(cfg.seed);
  std::uint64_t t = 0;
  double previous = best.objective;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t step = 0; step < n; ++step) {
      ++t;
      const auto i = static_cast<std::size_t>(rng.below(n));
      const auto xi = x.row(i);
      const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
      const double margin = signs[i] * (dot(w, xi) + b);
      const double shrink = 1.0 - eta * cfg.lambda;
      if (margin < 1.0) {
        const double g = eta * signs[i] * weight(i);
        for (std::size_t k = 0; k < d; ++k) w[k] = shrink * w[k] + g * xi[k];
        b += g;
      } else {
        for (std::size_t k = 0; k < d; ++k) w[k] *= shrink;
      }
      const double norm2 = dot(w, w);
      if (norm2 > radius * radius) {
        const double s = radius / std::sqrt(norm2);
        for (auto& v : w) v *= s;
      }
      b = std::clamp(b, -bias_bound, bias_bound);

      const double rho = (kAveragingGamma + 1.0) / (static_cast<double>(t) + kAveragingGamma);
      const double keep = 1.0 - std::min(rho, 1.0);
      for (std::size_t k = 0; k < d; ++k) avg_w[k] = keep * avg_w[k] + std::min(rho, 1.0) * w[k];
      avg_b = keep * avg_b + std::min(rho, 1.0) * b;
    }
    double j = hinge_objective(x, signs, avg_w, avg_b, cfg.lambda, weights);
    double checkpoint_b = avg_b;
    const double line_b = optimal_bias(x, signs, avg_w, weights);
    if (const double jl = hinge_objective(x, signs, avg_w, line_b, cfg.lambda, weights); jl < j) {
      j = jl;
      checkpoint_b = line_b;
    }
    if (j < best.objective) {
      best.w = avg_w;
      best.b = checkpoint_b;
      best.objective = j;
    }
    best.objective_trace.push_back(best.objective);
    best.converged = std::abs(previous - best.objective) <= cfg.tolerance * std::max(1e-300, std::abs(previous));
    previous = best.objective;
  }
  return best;
}

SvmModel train(const FeatureMatrix& x, std::span<const int> labels, const SvmConfig& cfg) {
  if (x.rows() < 2) throw TrainError("need at least 2 training rows");
  if (labels.size() != x.rows()) throw ShapeError("label count differs from row count");
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (double v : x.row(i))
      if (!std::isfinite(v)) throw InputError("non-finite feature in training row " + std::to_string(i));
  std::vector<int> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw TrainError("training data holds a single class");

  SvmModel model;
  model.classes = classes;
  model.class_names.reserve(classes.size());
  for (int c : classes) model.class_names.push_back(std::to_string(c));
  model.dim = x.cols();
  model.config = cfg;

  const auto solve = [&](std::size_t c) {
    const int label = classes[c];
    std::vector<int> signs(labels.size());
    std::size_t positives = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      signs[i] = labels[i] == label ? 1 : -1;
      positives += signs[i] > 0;
    }
    std::vector<double> weights;
    if (cfg.balance_classes) {
      const double n = static_cast<double>(labels.size());
      const double wp = n / (2.0 * static_cast<double>(positives));
      const double wn = n / (2.0 * static_cast<double>(labels.size() - positives));
      for (int s : signs) weights.push_back(s > 0 ? wp : wn);
    }
    SvmConfig sub = cfg;
    sub.seed = Rng::mix(cfg.seed + c);
    return train_binary(x, signs, sub, weights);
  };

  std::vector<BinaryModel> parts(classes.size());
  const std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
  if (workers == 1) {
    for (std::size_t c = 0; c < classes.size(); ++c) parts[c] = solve(c);
  } else {
    for (std::size_t start = 0; start < classes.size(); start += workers) {
      std::vector<std::future<BinaryModel>> jobs;
      const auto stop = std::min(classes.size(), start + workers);
      for (std::size_t c = start; c < stop; ++c) jobs.push_back(std::async(std::launch::async, solve, c));
      for (std::size_t c = start; c < stop; ++c) parts[c] = jobs[c - start].get();
    }
  }
  for (auto& p : parts) {
    model.weights.push_back(std::move(p.w));
    model.bias.push_back(p.b);
    model.final_objective.push_back(p.objective);
    model.objective_trace.push_back(std::move(p.objective_trace));
  }
  return model;
}

Prediction predict(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dim)
    throw ShapeError("feature vector has " + std::to_string(x.size()) + " dims, model expects " +
                     std::to_string(model.dim));
  Prediction p;
  p.decisions.resize(model.class_count());
  for (std::size_t c = 0; c < model.class_count(); ++c) {
    p.decisions[c] = dot(model.weights[c], x) + model.bias[c];
    if (p.decisions[c] > p.decisions[p.class_index]) p.class_index = c;
  }
  p.label = model.classes[p.class_index];
  return p;
}

std::vector<int> predict_labels(const SvmModel& model, const FeatureMatrix& x) {
  std::vector<int> out;
  out.reserve(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out.push_back(predict(model, x.row(i)).label);
  return out;
}

double accuracy(const SvmModel& model, const FeatureMatrix& x, std::span<const int> labels) {
  if (labels.size() != x.rows()) throw ShapeError("label count differs from row count");
  if (x.rows() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) hits += predict(model, x.row(i)).label == labels[i];
  return static_cast<double>(hits) / static_cast<double>(x.rows());
}

LambdaSelection select_lambda(const FeatureMatrix& x_train, std::span<const int> y_train,
                              const FeatureMatrix& x_val, std::span<const int> y_val,
                              std::span<const double> grid, const SvmConfig& cfg) {
  if (grid.empty()) throw InputError("empty lambda grid");
  LambdaSelection sel;
  sel.grid.assign(grid.begin(), grid.end());
  std::sort(sel.grid.begin(), sel.grid.end());
  double best = -1.0;
  for (double lambda : sel.grid) {
    SvmConfig c = cfg;
    c.lambda = lambda;
    const double acc = accuracy(train(x_train, y_train, c), x_val, y_val);
    sel.val_accuracy.push_back(acc);
    if (acc > best) {
      best = acc;
      sel.lambda = lambda;
    }
  }
  return sel;
}

std::string serialize_model(const SvmModel& model) {
  nlohmann::json header;
  header["format"] = "relscope-svm/1";
  header["classes"] = model.classes;
  header["class_names"] = model.class_names;
  header["dim"] = model.dim;
  header["config"] = {{"lambda", format_double17(model.config.lambda)},
                      {"epochs", model.config.epochs},
                      {"seed", model.config.seed},
                      {"tolerance", format_double17(model.config.tolerance)},
                      {"balance_classes", model.config.balance_classes}};
  header["seed"] = model.config.seed;
  std::vector<std::string> objectives;
  for (double v : model.final_objective) objectives.push_back(format_double17(v));
  header["final_objective"] = objectives;
  header["metadata"] = model.metadata;
  std::ostringstream os;
  os << header.dump() << '\n';
  for (std::size_t c = 0; c < model.class_count(); ++c) {
    os << model.classes[c] << '\t' << format_double17(model.bias[c]) << '\t';
    for (std::size_t k = 0; k < model.weights[c].size(); ++k)
      os << (k ? " " : "") << format_double17(model.weights[c][k]);
    os << '\n';
  }
  return os.str();
}

SvmModel deserialize_model(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty model file");
  SvmModel m;
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.value("format", std::string{}) != "relscope-svm/1")
      throw ParseError("unsupported model format");
    m.classes = header.at("classes").get<std::vector<int>>();
    m.class_names = header.at("class_names").get<std::vector<std::string>>();
    m.dim = header.at("dim").get<std::size_t>();
    const auto& c = header.at("config");
    m.config.lambda = parse_double(c.at("lambda").get<std::string>());
    m.config.epochs = c.at("epochs").get<std::size_t>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.tolerance = parse_double(c.at("tolerance").get<std::string>());
    m.config.balance_classes = c.at("balance_classes").get<bool>();
    for (const auto& v : header.at("final_objective")) m.final_objective.push_back(parse_double(v.get<std::string>()));
    m.metadata = header.value("metadata", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model header: ") + e.what());
  } catch (const InputError& e) {
    throw ParseError(std::string("malformed model header: ") + e.what());
  }
  if (m.classes.size() < 2 || m.class_names.size() != m.classes.size())
    throw ParseError("model header needs at least 2 classes with names");
  std::size_t line_no = 1;
  for (std::size_t c = 0; c < m.classes.size(); ++c) {
    ++line_no;
    if (!std::getline(is, line)) throw ParseError("model file ends before class " + std::to_string(c));
    const auto f = split_tabs(line);
    try {
      if (f.size() != 3) throw InputError("expected label, bias and weights");
      if (parse_int(f[0]) != m.classes[c]) throw InputError("class label out of order");
      m.bias.push_back(parse_double(f[1]));
      std::vector<double> w;
      std::size_t start = 0;
      const auto ws = f[2];
      while (start < ws.size()) {
        auto end = ws.find(' ', start);
        if (end == std::string_view::npos) end = ws.size();
        w.push_back(parse_double(ws.substr(start, end - start)));
        start = end + 1;
      }
      if (w.size() != m.dim) throw InputError("weight vector length differs from dim");
      m.weights.push_back(std::move(w));
    } catch (const InputError& e) {
      throw ParseError("model line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return m;
}

void save_model(const std::filesystem::path& path, const SvmModel& model) {
  OutputFile out(path);
  out.stream() << serialize_model(model);
  out.close();
}

SvmModel load_model(const std::filesystem::path& path) {
  try {
    return deserialize_model(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace relscope
