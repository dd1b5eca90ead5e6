#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace relscope {

/// Dense row-major design matrix.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  /// Appends a row; the first row fixes the column count (ShapeError on a
  /// later mismatch).
  void push_row(std::span<const double> row);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SvmConfig {
  double lambda = 1e-2;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  /// Relative objective change between checkpoints below which a binary
  /// problem is reported as converged. Diagnostic only.
  double tolerance = 1e-3;
  /// Weight each binary problem's positives and negatives to equal total mass.
  bool balance_classes = false;
};

/// One binary problem min (lambda/2)|w|^2 + (1/n) sum_i c_i max(0, 1 - s_i (w.x_i + b)).
struct BinaryModel {
  std::vector<double> w;
  double b = 0.0;
  /// Objective of the returned iterate at each epoch checkpoint (index 0 is
  /// the zero model). Non-increasing.
  std::vector<double> objective_trace;
  double objective = 0.0;
  bool converged = false;
};

/// Hinge objective of (w, b). `weights` may be empty (all ones).
double hinge_objective(const FeatureMatrix& x, std::span<const int> signs, std::span<const double> w,
                       double b, double lambda, std::span<const double> weights = {});

/// Pegasos-style stochastic subgradient descent (step 1/(lambda t), iterates
/// projected onto a ball that contains the optimum, unregularized bias) with
/// polynomial-decay iterate averaging. At each epoch the averaged iterate is
/// scored on the full objective and kept only if it improves on the best so
/// far. `signs` are +1/-1.
BinaryModel train_binary(const FeatureMatrix& x, std::span<const int> signs, const SvmConfig& cfg,
                         std::span<const double> weights = {});

/// One-vs-rest linear model.
struct SvmModel {
  std::vector<int> classes;  // ascending
  std::vector<std::string> class_names;
  std::size_t dim = 0;
  SvmConfig config;
  std::vector<std::vector<double>> weights;
  std::vector<double> bias;
  std::vector<double> final_objective;
  std::vector<std::vector<double>> objective_trace;
  /// Free-form header metadata (task, kinds, standardizer, split name).
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t class_count() const { return classes.size(); }
};

/// Trains one binary problem per distinct label, in ascending label order.
/// Throws TrainError for fewer than 2 rows or 2 labels, InputError for
/// non-finite features, ShapeError when label and row counts differ.
SvmModel train(const FeatureMatrix& x, std::span<const int> labels, const SvmConfig& cfg);

struct Prediction {
  int label = 0;
  std::size_t class_index = 0;
  std::vector<double> decisions;
};

/// Argmax of w_c.x + b_c; ties go to the lowest class index. ShapeError on
/// a dimension mismatch.
Prediction predict(const SvmModel& model, std::span<const double> x);
std::vector<int> predict_labels(const SvmModel& model, const FeatureMatrix& x);
double accuracy(const SvmModel& model, const FeatureMatrix& x, std::span<const int> labels);

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<double> grid;
  std::vector<double> val_accuracy;
};

inline const std::vector<double> kDefaultLambdaGrid{1e-4, 1e-3, 1e-2, 1e-1, 1.0};

/// Trains at each grid point and keeps the lambda with the best validation
/// accuracy, the smallest lambda on ties. InputError on an empty grid.
LambdaSelection select_lambda(const FeatureMatrix& x_train, std::span<const int> y_train,
                              const FeatureMatrix& x_val, std::span<const int> y_val,
                              std::span<const double> grid, const SvmConfig& cfg);

/// Model file: one JSON header line (classes, names, dim, config, seed,
/// metadata), then one line per class `label<TAB>bias<TAB>w0 w1 ...` with
/// every float at 17 significant digits.
void save_model(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_model(const std::filesystem::path& path);
std::string serialize_model(const SvmModel& model);
SvmModel deserialize_model(const std::string& text);

}  // namespace relscope
