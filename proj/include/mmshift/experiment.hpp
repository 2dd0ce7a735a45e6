#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmshift/numerics.hpp"

namespace mmshift {

enum class Scenario {
  kSpectrumSweep,
  kSignalStrengthSweep,
  kEigenspaceSweep,
  kModelShiftSweep,
  kReluNoiseSweep,
};

enum class EstimatorKind {
  kMinimax,
  kSRidge,
  kTRidge,
  kOls,
  kReweightedLs,
  kRidgeSourceOnly,
  kRidgeTargetOnly,
};

std::string to_string(Scenario s);
std::string to_string(EstimatorKind e);
Scenario scenario_from_string(const std::string& name);
EstimatorKind estimator_from_string(const std::string& name);

struct HyperGrid {
  std::vector<double> ridge_lambda;       // logspace(1e-4, 1e2, 25)
  std::vector<double> minimax_r_factors;  // {1/4, 1/2, 1, 2, 4} x ||beta_ss||
  std::vector<double> reweight_c;         // {0, 0.1, ..., 1}
  std::vector<double> gamma_factors;      // {0, 1/2, 1, 2} x ||beta_s - beta_t||

  static HyperGrid defaults();
};

struct ExperimentConfig {
  Scenario scenario = Scenario::kSpectrumSweep;
  std::vector<double> grid;  // scenario points; filled with defaults when empty
  long n_source = 2000;
  long n_target = 500;
  long n_unlabeled = 2000;
  long n_validation = 200;
  long dim = 50;
  double noise_std = 1.0;
  double radius = -1.0;  // < 0 means sqrt(dim)
  int replicates = 40;
  std::uint64_t base_seed = 0;
  std::vector<EstimatorKind> estimators;  // scenario defaults when empty
  HyperGrid hyper = HyperGrid::defaults();

  void validate() const;
  /// Applies scenario defaults for empty grid/estimators and radius < 0.
  void finalize();
};

/// Parses the JSON config; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& json_text);
ExperimentConfig config_from_file(const std::string& path);

struct ResultRow {
  double point = 0.0;
  std::string estimator;
  double mean_risk = 0.0;
  double std_error = 0.0;  // sample std / sqrt(replicates)
  double mean_hyper = 0.0;
  int replicates = 0;
};

struct ExperimentResult {
  std::string scenario;
  std::vector<ResultRow> rows;
  std::string metadata_json;  // config echo plus construction notes

  bool any_non_convergence = false;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Picks the grid value minimizing mean squared prediction error on the
/// held-out set; ties go to the smallest hyperparameter. fit receives only
/// the hyperparameter, never the validation data.
double cross_validate(const std::function<Vector(double)>& fit, std::vector<double> grid,
                      const Matrix& x_val, const Vector& y_val);
std::pair<double, double> cross_validate(
    const std::function<Vector(const std::pair<double, double>&)>& fit,
    std::vector<std::pair<double, double>> grid, const Matrix& x_val, const Vector& y_val);

// ---- file formats -------------------------------------------------------

/// Sample CSV: header x0..x{d-1} with optional trailing y column.
struct Dataset {
  Matrix x;
  Vector y;
  bool has_y = false;
};
void write_dataset(const std::string& path, const Matrix& x, const Vector* y);
Dataset read_dataset(const std::string& path);

/// Plain numeric CSV without header (square matrices for coefficients).
void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

void emit_csv(const ExperimentResult& result, const std::string& path);
ExperimentResult ingest_csv(const std::string& path);

/// Line chart with one polyline per estimator and +-1 SE error bars.
void emit_plot(const ExperimentResult& result, const std::string& path);

}  // namespace mmshift
