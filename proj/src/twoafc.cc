// Copyright 2026 The Watson Perceptual Loss Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "watson/twoafc.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "watson/errors.h"
#include "watson/grad.h"

namespace watson {
namespace {

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// u = (d0 - d1) / (|d0| + |d1|) and its partials; the training probability
// is sigmoid(gamma u).
struct Normalized {
  double u = 0.0;
  double du_d0 = 0.0;
  double du_d1 = 0.0;
};

Normalized Normalize(double d0, double d1) {
  Normalized n;
  const double s = std::abs(d0) + std::abs(d1);
  if (s == 0.0) return n;
  n.u = (d0 - d1) / s;
  // Distances are non-negative on every path that reaches here.
  n.du_d0 = 2.0 * d1 / (s * s);
  n.du_d1 = -2.0 * d0 / (s * s);
  return n;
}

// Loss of one record and dLoss/dz at z = gamma u.
std::pair<double, double> RecordLoss(double z, double p) {
  const double q = Sigmoid(z);
  const double loss = BceLoss(q, p);
  const bool clamped = q < kBceClamp || q > 1.0 - kBceClamp;
  return {loss, clamped ? 0.0 : q - p};
}

bool HasFreeParams(const Metric& m) { return m.is_watson(); }

// Free vector: the Watson layout (gamma last) or just [log gamma].
std::vector<double> InitialFree(const Metric& metric, double gamma) {
  if (HasFreeParams(metric)) {
    WatsonParams p = metric.watson;
    p.gamma = gamma;
    return ToUnconstrained(p);
  }
  return {std::log(gamma)};
}

size_t GammaIndex(const Metric& metric) {
  return HasFreeParams(metric) ? FreeLayout(metric.watson).gamma : 0;
}

Metric MetricAt(const Metric& shape, std::span<const double> free) {
  if (!HasFreeParams(shape)) return shape;
  Metric m = shape;
  m.watson = FromUnconstrained(shape.watson, free);
  return m;
}

class Stepper {
 public:
  Stepper(const TrainerConfig& config, size_t n)
      : config_(config), m_(n, 0.0), v_(n, 0.0) {}

  void Step(std::vector<double>& theta, const std::vector<double>& grad) {
    ++t_;
    if (config_.optimizer == Optimizer::kSgd) {
      for (size_t i = 0; i < theta.size(); ++i) {
        theta[i] -= config_.learning_rate * grad[i];
      }
      return;
    }
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, t_), c2 = 1.0 - std::pow(b2, t_);
    for (size_t i = 0; i < theta.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
      const double mh = m_[i] / c1, vh = v_[i] / c2;
      theta[i] -= config_.learning_rate * mh / (std::sqrt(vh) + config_.adam_epsilon);
    }
  }

 private:
  const TrainerConfig& config_;
  std::vector<double> m_, v_;
  int t_ = 0;
};

// Per-record evaluation: writes the record's gradient over the free vector
// into `grad` and returns its loss.
using RecordObjective = std::function<double(
    size_t record, const std::vector<double>& theta, const BlockGrid& grid,
    std::vector<double>& grad)>;

// Updates `theta` in place.
TrainResult Optimize(std::vector<double>& theta, size_t records,
                     size_t gamma_index, const TrainerConfig& config,
                     const RecordObjective& objective,
                     const std::function<double(const std::vector<double>&)>&
                         full_loss) {
  config.Validate();
  if (records == 0) throw InputError("training needs at least one record");
  TrainResult result;
  result.initial_loss = full_loss(theta);
  result.final_loss = result.initial_loss;
  if (!std::isfinite(result.initial_loss)) {
    throw NumericalError("non-finite training loss before the first epoch");
  }

  std::mt19937_64 rng(config.seed);
  Stepper stepper(config, theta.size());
  std::vector<size_t> order(records);
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t batch = static_cast<size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0, b = 0; start < records; start += batch, ++b) {
      const size_t count = std::min(batch, records - start);
      std::vector<BlockGrid> grids(count);
      if (config.grid_randomization) {
        for (auto& g : grids) std::tie(g.dy, g.dx) = SampleGridOffset(rng);
      }
      std::vector<std::vector<double>> grads(count);
      std::vector<double> losses(count);
      ParallelFor(count, config.threads, [&](size_t i) {
        grads[i].assign(theta.size(), 0.0);
        losses[i] = objective(order[start + i], theta, grids[i], grads[i]);
      });
      // Fixed accumulation order keeps results independent of threading.
      std::vector<double> total(theta.size(), 0.0);
      double loss = 0.0;
      for (size_t i = 0; i < count; ++i) {
        loss += losses[i];
        for (size_t j = 0; j < total.size(); ++j) total[j] += grads[i][j];
      }
      bool finite = std::isfinite(loss);
      for (double& g : total) {
        g /= static_cast<double>(count);
        finite = finite && std::isfinite(g);
      }
      if (!finite) {
        throw NumericalError("non-finite training loss or gradient at epoch " +
                             std::to_string(epoch) + ", batch " +
                             std::to_string(b));
      }
      if (config.freeze_metric) {
        for (size_t j = 0; j < total.size(); ++j) {
          if (j != gamma_index) total[j] = 0.0;
        }
      }
      stepper.Step(theta, total);
    }
    const double epoch_loss = full_loss(theta);
    if (!std::isfinite(epoch_loss)) {
      throw NumericalError("non-finite training loss after epoch " +
                           std::to_string(epoch));
    }
    result.loss_curve.push_back(epoch_loss);
    result.final_loss = epoch_loss;
  }
  result.head.gamma = std::exp(theta[gamma_index]);
  return result;
}

}  // namespace

void ValidateRecord(const TwoAfcRecord& record) {
  CheckSameShape(record.reference, record.first, "2AFC record");
  CheckSameShape(record.reference, record.second, "2AFC record");
  if (record.reference.space() != record.first.space() ||
      record.reference.space() != record.second.space()) {
    throw InputError("2AFC record images use different colorspaces");
  }
  if (!(record.p >= 0.0 && record.p <= 1.0)) {
    throw InputError("2AFC judgement p must lie in [0, 1]");
  }
}

void RankingHead::Validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InputError("ranking head gamma must be positive");
  }
}

double PredictPreference(double d0, double d1, const RankingHead& head) {
  if (d0 == 0.0 && d1 == 0.0) return 0.5;
  return Sigmoid(head.gamma * (d1 - d0) / (std::abs(d1) + std::abs(d0)));
}

double BceLoss(double q, double p) {
  q = std::clamp(q, kBceClamp, 1.0 - kBceClamp);
  return -(p * std::log(q) + (1.0 - p) * std::log(1.0 - q));
}

double BinaryChoice(double d0, double d1) {
  if (d0 < d1) return 0.0;
  if (d0 > d1) return 1.0;
  return 0.5;
}

double RecordScore(double p, double q) { return p * q + (1.0 - p) * (1.0 - q); }

double AgreementScore(std::span<const double> p, std::span<const double> d0,
                      std::span<const double> d1) {
  if (p.empty()) throw InputError("agreement score of an empty record list");
  if (d0.size() != p.size() || d1.size() != p.size()) {
    throw InputError("agreement score inputs differ in length");
  }
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    total += RecordScore(p[i], BinaryChoice(d0[i], d1[i]));
  }
  return total / static_cast<double>(p.size());
}

double HumanCeiling(std::span<const double> p) {
  if (p.empty()) throw InputError("human ceiling of an empty record list");
  double total = 0.0;
  for (double v : p) total += RecordScore(v, v);
  return total / static_cast<double>(p.size());
}

double AgreementScore(std::span<const TwoAfcRecord> records,
                      const DistanceFn& distance) {
  std::vector<double> p, d0, d1;
  for (const auto& r : records) {
    p.push_back(r.p);
    d0.push_back(distance(r.reference, r.first));
    d1.push_back(distance(r.reference, r.second));
  }
  return AgreementScore(p, d0, d1);
}

void TrainerConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw InputError("learning rate must be > 0");
  if (epochs < 0) throw InputError("epochs must be >= 0");
  if (batch_size <= 0) throw InputError("batch size must be > 0");
  if (threads <= 0) throw InputError("threads must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InputError("Adam betas must lie in [0, 1)");
  }
}

TrainResult TrainMetric(const Metric& initial, const RankingHead& head,
                        std::span<const TwoAfcRecord> records,
                        const TrainerConfig& config) {
  head.Validate();
  for (const auto& r : records) ValidateRecord(r);
  const size_t gamma_index = GammaIndex(initial);
  const bool metric_grads = HasFreeParams(initial) && !config.freeze_metric;

  auto objective = [&](size_t i, const std::vector<double>& theta,
                       const BlockGrid& grid, std::vector<double>& grad) {
    const TwoAfcRecord& r = records[i];
    const Metric m = MetricAt(initial, theta);
    const double gamma = std::exp(theta[gamma_index]);
    double d0, d1;
    GradientResult g0, g1;
    if (metric_grads) {
      g0 = ValueAndGrad({GradTarget::kParams, grid}, m, r.reference, r.first);
      g1 = ValueAndGrad({GradTarget::kParams, grid}, m, r.reference, r.second);
      d0 = g0.value;
      d1 = g1.value;
    } else {
      d0 = Distance(m, r.reference, r.first, grid);
      d1 = Distance(m, r.reference, r.second, grid);
    }
    const Normalized n = Normalize(d0, d1);
    const auto [loss, dz] = RecordLoss(gamma * n.u, r.p);
    grad[gamma_index] += dz * gamma * n.u;
    if (metric_grads) {
      const double a = dz * gamma * n.du_d0, b = dz * gamma * n.du_d1;
      for (size_t j = 0; j < grad.size(); ++j) {
        if (j == gamma_index) continue;
        grad[j] += a * g0.gradient[j] + b * g1.gradient[j];
      }
    }
    return loss;
  };
  auto full_loss = [&](const std::vector<double>& theta) {
    RankingHead h{std::exp(theta[gamma_index])};
    return MeanTrainingLoss(MetricAt(initial, theta), h, records,
                            config.threads);
  };

  std::vector<double> theta = InitialFree(initial, head.gamma);
  TrainResult result;
  if (config.epochs == 0) {
    config.Validate();
    result.metric = initial;
    result.head = head;
    if (initial.is_watson()) result.metric.watson.gamma = head.gamma;
    result.initial_loss = full_loss(theta);
    result.final_loss = result.initial_loss;
    return result;
  }
  result = Optimize(theta, records.size(), gamma_index, config, objective,
                    full_loss);
  result.metric = MetricAt(initial, theta);
  if (result.metric.is_watson()) result.metric.watson.gamma = result.head.gamma;
  return result;
}

TrainResult TrainHead(std::span<const double> d0, std::span<const double> d1,
                      std::span<const double> p, const RankingHead& head,
                      const TrainerConfig& config) {
  head.Validate();
  if (d0.size() != p.size() || d1.size() != p.size()) {
    throw InputError("TrainHead inputs differ in length");
  }
  auto objective = [&](size_t i, const std::vector<double>& theta,
                       const BlockGrid&, std::vector<double>& grad) {
    const double gamma = std::exp(theta[0]);
    const Normalized n = Normalize(d0[i], d1[i]);
    const auto [loss, dz] = RecordLoss(gamma * n.u, p[i]);
    grad[0] += dz * gamma * n.u;
    return loss;
  };
  auto full_loss = [&](const std::vector<double>& theta) {
    const double gamma = std::exp(theta[0]);
    double total = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
      total += RecordLoss(gamma * Normalize(d0[i], d1[i]).u, p[i]).first;
    }
    return total / static_cast<double>(p.size());
  };
  TrainerConfig c = config;
  c.grid_randomization = false;
  if (c.epochs == 0) {
    c.Validate();
    TrainResult r;
    r.head = head;
    r.initial_loss = r.final_loss = full_loss({std::log(head.gamma)});
    return r;
  }
  std::vector<double> theta = {std::log(head.gamma)};
  TrainResult r = Optimize(theta, p.size(), 0, c, objective, full_loss);
  r.metric = Metric::Lp(2.0);
  return r;
}

double MeanTrainingLoss(const Metric& metric, const RankingHead& head,
                        std::span<const TwoAfcRecord> records, int threads) {
  if (records.empty()) throw InputError("training loss of an empty dataset");
  std::vector<double> losses(records.size());
  ParallelFor(records.size(), threads, [&](size_t i) {
    const TwoAfcRecord& r = records[i];
    const double d0 = Distance(metric, r.reference, r.first);
    const double d1 = Distance(metric, r.reference, r.second);
    losses[i] = RecordLoss(head.gamma * Normalize(d0, d1).u, r.p).first;
  });
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(records.size());
}

EvalReport EvaluateMetric(const Metric& metric,
                          std::span<const TwoAfcRecord> records, int threads) {
  if (records.empty()) throw InputError("evaluation of an empty dataset");
  std::vector<double> d0(records.size()), d1(records.size()), p;
  ParallelFor(records.size(), threads, [&](size_t i) {
    d0[i] = Distance(metric, records[i].reference, records[i].first);
    d1[i] = Distance(metric, records[i].reference, records[i].second);
  });
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    p.push_back(r.p);
    std::string key;
    if (r.family0.empty() || r.family1.empty()) {
      key = "untagged";
    } else if (r.family0 == r.family1) {
      key = r.family0;
    } else {
      key = std::min(r.family0, r.family1) + "+" + std::max(r.family0, r.family1);
    }
    groups[key].push_back(i);
  }
  EvalReport report;
  report.records = records.size();
  report.agreement = AgreementScore(p, d0, d1);
  report.human_ceiling = HumanCeiling(p);
  for (const auto& [name, idx] : groups) {
    std::vector<double> gp, g0, g1;
    for (size_t i : idx) {
      gp.push_back(p[i]);
      g0.push_back(d0[i]);
      g1.push_back(d1[i]);
    }
    report.groups.push_back(
        {name, idx.size(), AgreementScore(gp, g0, g1), HumanCeiling(gp)});
  }
  return report;
}

void ParallelFor(size_t n, int threads, const std::function<void(size_t)>& fn) {
  const size_t workers = std::min<size_t>(std::max(threads, 1), n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  const size_t chunk = (n + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const size_t lo = w * chunk, hi = std::min(n, lo + chunk);
      try {
        for (size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace watson
