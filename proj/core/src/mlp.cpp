#include "sfn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "json_envelope.hpp"
#include "sfn/error.hpp"
#include "sfn/metrics.hpp"
#include "sfn/parallel.hpp"
#include "sfn/random.hpp"

namespace sfn {
namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kShuffleStream = 0x5F;

// Parameter layout inside the canonical vector.
struct Layout {
  std::size_t d;
  std::size_t h;
  std::size_t b1() const { return h * d; }
  std::size_t w2() const { return h * d + h; }
  std::size_t b2() const { return h * d + 2 * h; }
  std::size_t size() const { return h * d + 2 * h + 1; }
};

double forward(const Layout& L, std::span<const double> theta, std::span<const double> z,
               std::span<double> act) {
  double y = theta[L.b2()];
  for (std::size_t j = 0; j < L.h; ++j) {
    double a = theta[L.b1() + j];
    for (std::size_t k = 0; k < L.d; ++k) a += theta[j * L.d + k] * z[k];
    act[j] = std::tanh(a);
    y += theta[L.w2() + j] * act[j];
  }
  return y;
}

// d(y)/d(theta) for normalized output y.
double backward(const Layout& L, std::span<const double> theta, std::span<const double> z,
                std::span<double> act, std::span<double> grad) {
  const double y = forward(L, theta, z, act);
  for (std::size_t j = 0; j < L.h; ++j) {
    const double delta = theta[L.w2() + j] * (1.0 - act[j] * act[j]);
    for (std::size_t k = 0; k < L.d; ++k) grad[j * L.d + k] = delta * z[k];
    grad[L.b1() + j] = delta;
    grad[L.w2() + j] = act[j];
  }
  grad[L.b2()] = 1.0;
  return y;
}

struct Normalized {
  Matrix inputs;
  std::vector<double> targets;
};

Normalized normalize(const MlpModel& m, const Dataset& data) {
  Normalized out;
  out.inputs = Matrix(data.size(), m.input_dim);
  out.targets.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t k = 0; k < m.input_dim; ++k) {
      out.inputs(i, k) = (data.inputs(i, k) - m.input_mean[k]) / m.input_scale[k];
    }
    out.targets[i] = (data.targets[i] - m.target_mean) / m.target_scale;
  }
  return out;
}

// MSE in target units.
double raw_mse(const Layout& L, std::span<const double> theta, const Normalized& data,
               double target_scale, std::vector<double>& act) {
  double sse = 0.0;
  for (std::size_t i = 0; i < data.targets.size(); ++i) {
    const double e = forward(L, theta, data.inputs.row(i), act) - data.targets[i];
    sse += e * e;
  }
  return sse / static_cast<double>(data.targets.size()) * target_scale * target_scale;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string diverged(MlpMethod method, std::size_t epoch) {
  return std::string(to_string(method)) + " diverged at epoch " + std::to_string(epoch);
}

void train_backprop(const Layout& L, std::vector<double>& theta, const Normalized& train,
                    const Normalized& val, MlpMethod method, const MlpConfig& cfg,
                    double target_scale, MlpTrainResult& result) {
  std::vector<double> act(L.h);
  Rng rng(derive_seed({cfg.seed, L.h, kShuffleStream}));
  std::vector<std::size_t> order(train.targets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const bool early_stop = method == MlpMethod::ESBP;
  double best_val = raw_mse(L, theta, val, target_scale, act);
  std::vector<double> best = theta;
  result.validation_history.push_back(best_val);
  std::size_t since_best = 0;
  const double decay =
      cfg.epochs > 1 ? std::pow(cfg.final_rate_fraction, 1.0 / static_cast<double>(cfg.epochs - 1))
                     : 1.0;
  double rate = cfg.learning_rate;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    for (std::size_t i : order) {
      const auto z = train.inputs.row(i);
      const double e = forward(L, theta, z, act) - train.targets[i];
      for (std::size_t j = 0; j < L.h; ++j) {
        const double delta = e * theta[L.w2() + j] * (1.0 - act[j] * act[j]);
        theta[L.w2() + j] -= rate * e * act[j];
        for (std::size_t k = 0; k < L.d; ++k) theta[j * L.d + k] -= rate * delta * z[k];
        theta[L.b1() + j] -= rate * delta;
      }
      theta[L.b2()] -= rate * e;
    }
    if (!all_finite(theta)) throw TrainingError(diverged(method, epoch + 1));
    const double v = raw_mse(L, theta, val, target_scale, act);
    if (!std::isfinite(v)) throw TrainingError(diverged(method, epoch + 1));
    result.validation_history.push_back(v);
    result.epochs_run = epoch + 1;
    rate *= decay;
    if (early_stop) {
      if (v < best_val) {
        best_val = v;
        best = theta;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        break;
      }
    }
  }
  if (early_stop) theta = best;
}

void train_bayesian(const Layout& L, std::vector<double>& theta, const Normalized& train,
                    const Normalized& val, const MlpConfig& cfg, double target_scale,
                    MlpModel& model, MlpTrainResult& result) {
  using Eigen::Index;
  const std::size_t n = train.targets.size();
  const std::size_t np = L.size();
  std::vector<double> act(L.h);
  std::vector<double> row(np);
  Eigen::MatrixXd jac(static_cast<Index>(n), static_cast<Index>(np));
  Eigen::VectorXd err(static_cast<Index>(n));

  const auto linearize = [&](std::span<const double> th) {
    for (std::size_t i = 0; i < n; ++i) {
      const double y = backward(L, th, train.inputs.row(i), act, row);
      err(static_cast<Index>(i)) = y - train.targets[i];
      for (std::size_t k = 0; k < np; ++k) jac(static_cast<Index>(i), static_cast<Index>(k)) = row[k];
    }
  };
  const auto sse_of = [&](std::span<const double> th) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = forward(L, th, train.inputs.row(i), act) - train.targets[i];
      s += e * e;
    }
    return s;
  };
  const auto sum_sq = [](std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
  };

  double alpha = 0.0;
  double beta = 1.0;
  double gamma = static_cast<double>(np);
  double mu = 0.005;
  linearize(theta);
  result.validation_history.push_back(raw_mse(L, theta, val, target_scale, act));
  std::vector<double> trial(np);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(static_cast<Index>(np), static_cast<Index>(np));

  for (std::size_t it = 0; it < cfg.br_iterations; ++it) {
    const double ed = err.squaredNorm();
    const double ew = sum_sq(theta);
    const double objective = beta * ed + alpha * ew;
    Eigen::MatrixXd jtj = Eigen::MatrixXd::Zero(static_cast<Index>(np), static_cast<Index>(np));
    jtj.selfadjointView<Eigen::Lower>().rankUpdate(jac.transpose());
    jtj = jtj.selfadjointView<Eigen::Lower>();
    const Eigen::Map<const Eigen::VectorXd> th(theta.data(), static_cast<Index>(np));
    const Eigen::VectorXd grad = 2.0 * beta * (jac.transpose() * err) + 2.0 * alpha * th;

    bool accepted = false;
    while (mu <= 1e10) {
      const Eigen::MatrixXd h = 2.0 * beta * jtj + (2.0 * alpha + mu) * eye;
      const Eigen::VectorXd step = h.ldlt().solve(-grad);
      for (std::size_t k = 0; k < np; ++k) trial[k] = theta[k] + step(static_cast<Index>(k));
      const double candidate = beta * sse_of(trial) + alpha * sum_sq(trial);
      if (std::isfinite(candidate) && candidate < objective) {
        accepted = true;
        mu = std::max(mu * 0.1, 1e-20);
        break;
      }
      mu *= 10.0;
    }
    if (!accepted) break;
    theta = trial;
    if (!all_finite(theta)) throw TrainingError(diverged(MlpMethod::BRBP, it + 1));
    linearize(theta);

    // Evidence update with the Gauss-Newton Hessian of the objective.
    const double ed_new = err.squaredNorm();
    const double ew_new = sum_sq(theta);
    if (alpha > 0.0) {
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(static_cast<Index>(np), static_cast<Index>(np));
      hess.selfadjointView<Eigen::Lower>().rankUpdate(jac.transpose());
      hess = hess.selfadjointView<Eigen::Lower>();
      hess = 2.0 * beta * hess + 2.0 * alpha * eye;
      const Eigen::MatrixXd inv = hess.ldlt().solve(eye);
      gamma = static_cast<double>(np) - 2.0 * alpha * inv.trace();
    } else {
      gamma = static_cast<double>(np);
    }
    gamma = std::clamp(gamma, 0.0, static_cast<double>(np));
    if (ew_new > 0.0) alpha = gamma / (2.0 * ew_new);
    const double v = raw_mse(L, theta, val, target_scale, act);
    if (!std::isfinite(v) || !std::isfinite(alpha)) {
      throw TrainingError(diverged(MlpMethod::BRBP, it + 1));
    }
    result.validation_history.push_back(v);
    result.epochs_run = it + 1;
    if (ed_new < 1e-300) break;
    beta = std::max(static_cast<double>(n) - gamma, 1.0) / (2.0 * ed_new);
  }
  model.alpha = alpha;
  model.beta = beta;
  model.effective_parameters = gamma;
}

}  // namespace

std::string_view to_string(MlpMethod m) noexcept {
  switch (m) {
    case MlpMethod::BBP:
      return "B-BP";
    case MlpMethod::ESBP:
      return "ES-BP";
    case MlpMethod::BRBP:
      return "BR-BP";
  }
  return "?";
}

std::optional<MlpMethod> parse_mlp_method(std::string_view text) noexcept {
  std::string s;
  for (char c : text) {
    if (c != '-' && c != '_') s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (s == "BBP") return MlpMethod::BBP;
  if (s == "ESBP") return MlpMethod::ESBP;
  if (s == "BRBP") return MlpMethod::BRBP;
  return std::nullopt;
}

std::vector<double> mlp_parameters(const MlpModel& m) {
  std::vector<double> out = m.hidden_weights;
  out.insert(out.end(), m.hidden_bias.begin(), m.hidden_bias.end());
  out.insert(out.end(), m.output_weights.begin(), m.output_weights.end());
  out.push_back(m.output_bias);
  return out;
}

void set_mlp_parameters(MlpModel& m, std::span<const double> values) {
  const Layout L{m.input_dim, m.hidden};
  if (values.size() != L.size()) throw ModelError("MLP parameter vector has the wrong length");
  m.hidden_weights.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(L.b1()));
  m.hidden_bias.assign(values.begin() + static_cast<std::ptrdiff_t>(L.b1()),
                       values.begin() + static_cast<std::ptrdiff_t>(L.w2()));
  m.output_weights.assign(values.begin() + static_cast<std::ptrdiff_t>(L.w2()),
                          values.begin() + static_cast<std::ptrdiff_t>(L.b2()));
  m.output_bias = values[L.b2()];
}

double mlp_gradient(const MlpModel& m, std::span<const double> x, std::span<double> grad) {
  const Layout L{m.input_dim, m.hidden};
  if (x.size() != m.input_dim) throw DataError("MLP input has the wrong dimension");
  const std::vector<double> theta = mlp_parameters(m);
  std::vector<double> z(m.input_dim);
  for (std::size_t k = 0; k < m.input_dim; ++k) z[k] = (x[k] - m.input_mean[k]) / m.input_scale[k];
  std::vector<double> act(m.hidden);
  const double y = backward(L, theta, z, act, grad);
  for (double& g : grad) g *= m.target_scale;
  return m.target_mean + m.target_scale * y;
}

double mlp_predict(const MlpModel& m, std::span<const double> x) {
  const Layout L{m.input_dim, m.hidden};
  if (x.size() != m.input_dim) throw DataError("MLP input has the wrong dimension");
  const std::vector<double> theta = mlp_parameters(m);
  std::vector<double> z(m.input_dim);
  for (std::size_t k = 0; k < m.input_dim; ++k) z[k] = (x[k] - m.input_mean[k]) / m.input_scale[k];
  std::vector<double> act(m.hidden);
  return m.target_mean + m.target_scale * forward(L, theta, z, act);
}

std::vector<double> mlp_predict(const MlpModel& m, const Matrix& inputs) {
  std::vector<double> out(inputs.rows());
  for (std::size_t i = 0; i < inputs.rows(); ++i) out[i] = mlp_predict(m, inputs.row(i));
  return out;
}

MlpModel mlp_init(const Dataset& train, std::size_t hidden, MlpMethod method, std::uint64_t seed) {
  if (hidden == 0) throw ConfigError("hidden node count must be >= 1");
  if (train.empty()) throw ConfigError("empty training set");
  MlpModel m;
  m.input_dim = train.input_dim();
  m.hidden = hidden;
  m.method = method;
  const double n = static_cast<double>(train.size());
  m.input_mean.assign(m.input_dim, 0.0);
  m.input_scale.assign(m.input_dim, 1.0);
  for (std::size_t k = 0; k < m.input_dim; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) sum += train.inputs(i, k);
    const double mean = sum / n;
    double var = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const double c = train.inputs(i, k) - mean;
      var += c * c;
    }
    const double sd = std::sqrt(var / n);
    m.input_mean[k] = mean;
    m.input_scale[k] = sd > 0.0 ? sd : 1.0;
  }
  double sum = 0.0;
  for (double t : train.targets) sum += t;
  m.target_mean = sum / n;
  double var = 0.0;
  for (double t : train.targets) var += (t - m.target_mean) * (t - m.target_mean);
  const double sd = std::sqrt(var / n);
  m.target_scale = sd > 0.0 ? sd : 1.0;

  // Hidden layer uniform in +-1/sqrt(fan_in); output layer starts at zero.
  Rng rng(derive_seed({seed, hidden, kInitStream}));
  const double bound = 1.0 / std::sqrt(static_cast<double>(m.input_dim));
  m.hidden_weights.resize(hidden * m.input_dim);
  for (double& w : m.hidden_weights) w = rng.uniform(-bound, bound);
  m.hidden_bias.resize(hidden);
  for (double& b : m.hidden_bias) b = rng.uniform(-bound, bound);
  m.output_weights.assign(hidden, 0.0);
  m.output_bias = 0.0;
  return m;
}

MlpTrainResult mlp_train(const SplitDataset& data, std::size_t hidden, MlpMethod method,
                         const MlpConfig& cfg) {
  if (data.validation.empty()) throw ConfigError("empty validation set");
  MlpTrainResult result;
  result.model = mlp_init(data.train, hidden, method, cfg.seed);
  MlpModel& m = result.model;
  const Layout L{m.input_dim, m.hidden};
  const Normalized train = normalize(m, data.train);
  const Normalized val = normalize(m, data.validation);
  std::vector<double> theta = mlp_parameters(m);

  if (method == MlpMethod::BRBP) {
    train_bayesian(L, theta, train, val, cfg, m.target_scale, m, result);
  } else {
    train_backprop(L, theta, train, val, method, cfg, m.target_scale, result);
  }
  set_mlp_parameters(m, theta);
  std::vector<double> act(L.h);
  result.train_mse = raw_mse(L, theta, train, m.target_scale, act);
  result.validation_mse = raw_mse(L, theta, val, m.target_scale, act);
  if (!std::isfinite(result.train_mse)) throw TrainingError(diverged(method, result.epochs_run));
  return result;
}

HiddenSelection select_hidden(const SplitDataset& data, MlpMethod method,
                              std::span<const std::size_t> grid, const MlpConfig& cfg) {
  if (grid.empty()) throw ConfigError("empty hidden-node grid");
  std::vector<std::optional<MlpTrainResult>> results(grid.size());
  std::vector<std::string> errors(grid.size());
  parallel_for(grid.size(), worker_count(cfg.threads), [&](std::size_t i) {
    try {
      results[i] = mlp_train(data, grid[i], method, cfg);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  HiddenSelection out;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!results[i]) {
      out.warnings.push_back(std::string(to_string(method)) + " with " + std::to_string(grid[i]) +
                             " hidden nodes skipped: " + errors[i]);
      continue;
    }
    out.tried.emplace_back(grid[i], results[i]->validation_mse);
    if (!best) {
      best = i;
      continue;
    }
    const double v = results[i]->validation_mse;
    const double b = results[*best]->validation_mse;
    if (v < b || (v == b && grid[i] < grid[*best])) best = i;
  }
  if (!best) throw TrainingError("every hidden-node setting failed for " + std::string(to_string(method)));
  out.hidden = grid[*best];
  out.result = std::move(*results[*best]);
  return out;
}

std::string serialize_mlp(const MlpModel& m, std::string_view provenance) {
  detail::Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "mlp";
  doc["provenance"] = std::string(provenance);
  doc["method"] = std::string(to_string(m.method));
  doc["input_dim"] = m.input_dim;
  doc["hidden"] = m.hidden;
  doc["hidden_weights"] = m.hidden_weights;
  doc["hidden_bias"] = m.hidden_bias;
  doc["output_weights"] = m.output_weights;
  doc["output_bias"] = m.output_bias;
  doc["input_mean"] = m.input_mean;
  doc["input_scale"] = m.input_scale;
  doc["target_mean"] = m.target_mean;
  doc["target_scale"] = m.target_scale;
  doc["alpha"] = m.alpha;
  doc["beta"] = m.beta;
  doc["effective_parameters"] = m.effective_parameters;
  return doc.dump(2) + "\n";
}

MlpModel parse_mlp(std::string_view bytes) {
  using detail::field;
  const detail::Json doc = detail::open_envelope(bytes, "mlp");
  MlpModel m;
  const auto method = parse_mlp_method(field<std::string>(doc, "method", "mlp"));
  if (!method) throw ParseError("unknown MLP method", 0);
  m.method = *method;
  m.input_dim = field<std::size_t>(doc, "input_dim", "mlp");
  m.hidden = field<std::size_t>(doc, "hidden", "mlp");
  m.hidden_weights = field<std::vector<double>>(doc, "hidden_weights", "mlp");
  m.hidden_bias = field<std::vector<double>>(doc, "hidden_bias", "mlp");
  m.output_weights = field<std::vector<double>>(doc, "output_weights", "mlp");
  m.output_bias = field<double>(doc, "output_bias", "mlp");
  m.input_mean = field<std::vector<double>>(doc, "input_mean", "mlp");
  m.input_scale = field<std::vector<double>>(doc, "input_scale", "mlp");
  m.target_mean = field<double>(doc, "target_mean", "mlp");
  m.target_scale = field<double>(doc, "target_scale", "mlp");
  m.alpha = field<double>(doc, "alpha", "mlp");
  m.beta = field<double>(doc, "beta", "mlp");
  m.effective_parameters = field<double>(doc, "effective_parameters", "mlp");
  if (m.hidden_weights.size() != m.hidden * m.input_dim || m.hidden_bias.size() != m.hidden ||
      m.output_weights.size() != m.hidden || m.input_mean.size() != m.input_dim ||
      m.input_scale.size() != m.input_dim) {
    throw ModelError("MLP record arrays do not match input_dim/hidden");
  }
  return m;
}

}  // namespace sfn
