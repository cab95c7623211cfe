#include "qprl/qaoa.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

#include "qprl/env.hpp"
#include "qprl/errors.hpp"

namespace qprl {

void QaoaConfig::validate() const {
  if (bins < 2) throw config_error("bins must be >= 2");
  if (shots < 1) throw config_error("shots must be >= 1");
}

std::size_t pair_index(int i, int j, int n) {
  if (!(0 <= i && i < j && j < n)) {
    throw std::invalid_argument("pair_index needs 0 <= i < j < n");
  }
  // Pairs {0,1}, {0,2}, ..., {0,n-1}, {1,2}, ...: row i starts after
  // (n-1) + (n-2) + ... + (n-i) entries.
  const std::size_t row_start = static_cast<std::size_t>(i) * (n - 1) -
                                static_cast<std::size_t>(i) * (i - 1) / 2;
  return row_start + static_cast<std::size_t>(j - i - 1);
}

IsingForm ising_form(const ProblemInstance& instance) {
  const int n = instance.num_variables();
  IsingForm form;
  form.n = n;
  form.linear.assign(n, 0.0);
  form.quad.assign(static_cast<std::size_t>(n) * (n - 1) / 2, 0.0);

  switch (instance.kind()) {
    case ProblemKind::MaxCut:
      // (1/2) sum_{i,j} w_ij (1 - z_i z_j)/2
      //   = (1/2) sum_{i<j} w_ij  -  (1/2) sum_{i<j} w_ij z_i z_j
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const double w = instance.weight(i, j);
          form.constant += 0.5 * w;
          form.quad[pair_index(i, j, n)] = -0.5 * w;
        }
      }
      break;
    case ProblemKind::MaxQp:
      // sum_{i,j} w_ij z_i z_j = 2 sum_{i<j} w_ij z_i z_j (zero diagonal).
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          form.quad[pair_index(i, j, n)] = 2.0 * instance.weight(i, j);
        }
      }
      break;
    case ProblemKind::Qubo:
      // sum_{i,j} w_ij b_i b_j with b = (1 - z)/2:
      //   constant = (1/4) sum_{i!=j} w_ij + (1/2) sum_i w_ii
      //   linear_i = -(1/2) sum_j w_ij            (full row, incl. diagonal)
      //   quad_ij  = (1/2) w_ij                   (i < j)
      for (int i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) {
          const double w = instance.weight(i, j);
          row_sum += w;
          if (j != i) form.constant += 0.25 * w;
        }
        form.constant += 0.5 * instance.weight(i, i);
        form.linear[i] = -0.5 * row_sum;
        for (int j = i + 1; j < n; ++j) {
          form.quad[pair_index(i, j, n)] = 0.5 * instance.weight(i, j);
        }
      }
      break;
  }
  return form;
}

double ising_eval(const IsingForm& form, std::span<const std::uint8_t> bits) {
  if (bits.size() != static_cast<std::size_t>(form.n)) {
    throw std::invalid_argument("assignment has wrong length");
  }
  double total = form.constant;
  for (int i = 0; i < form.n; ++i) {
    const double zi = 1.0 - 2.0 * bits[i];
    total += form.linear[i] * zi;
    for (int j = i + 1; j < form.n; ++j) {
      const double zj = 1.0 - 2.0 * bits[j];
      total += form.quad[pair_index(i, j, form.n)] * zi * zj;
    }
  }
  return total;
}

StateVector build_qaoa_state(const ProblemInstance& instance, double gamma,
                             double beta) {
  const int n = instance.num_variables();
  StateVector state(n);
  for (int q = 0; q < n; ++q) state.apply(GateOp::h(q));
  state.apply_phase_zz(instance, gamma);
  // e^{-i*beta*X} = RX(2*beta) under the half-angle convention.
  for (int q = 0; q < n; ++q) state.apply(GateOp::rx(q, 2.0 * beta));
  return state;
}

std::vector<GateOp> qaoa_program(const ProblemInstance& instance, double gamma,
                                 double beta) {
  const int n = instance.num_variables();
  const IsingForm form = ising_form(instance);
  std::vector<GateOp> program;
  for (int q = 0; q < n; ++q) program.push_back(GateOp::h(q));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double c = form.quad[pair_index(i, j, n)];
      if (c == 0.0) continue;
      // exp(-i*gamma*c*Z_i Z_j) as CNOT / RZ(2*gamma*c) / CNOT.
      program.push_back(GateOp::cnot(i, j));
      program.push_back(GateOp::rz(j, 2.0 * gamma * c));
      program.push_back(GateOp::cnot(i, j));
    }
  }
  for (int i = 0; i < n; ++i) {
    if (form.linear[i] == 0.0) continue;
    program.push_back(GateOp::rz(i, 2.0 * gamma * form.linear[i]));
  }
  for (int q = 0; q < n; ++q) program.push_back(GateOp::rx(q, 2.0 * beta));
  return program;
}

QaoaResult grid_search(const ProblemInstance& instance, const QaoaConfig& cfg) {
  cfg.validate();
  const double width = 2.0 * std::numbers::pi / static_cast<double>(cfg.bins);

  QaoaResult best;
  double best_value = -1.0;
  for (int gi = 0; gi < cfg.bins; ++gi) {
    const double gamma = gi * width;
    for (int bi = 0; bi < cfg.bins; ++bi) {
      const double beta = bi * width;
      const StateVector state = build_qaoa_state(instance, gamma, beta);
      const double value = normalized_expectation(state, instance);
      if (value > best_value) {  // strict: ties keep the first (gi, bi)
        best_value = value;
        best.gamma_index = gi;
        best.beta_index = bi;
        best.gamma_star = gamma;
        best.beta_star = beta;
      }
    }
  }
  best.exact_expectation = best_value;
  return best;
}

double sampled_quality(const ProblemInstance& instance, double gamma,
                       double beta, const QaoaConfig& cfg, RandomStream& rng) {
  cfg.validate();
  const StateVector state = build_qaoa_state(instance, gamma, beta);
  const BitMatrix samples = sample_bitstrings(state, cfg.shots, rng);
  return reward_from_samples(samples, instance);
}

QaoaResult run_qaoa(const ProblemInstance& instance, const QaoaConfig& cfg,
                    RandomStream& rng) {
  QaoaResult result = grid_search(instance, cfg);
  result.program = qaoa_program(instance, result.gamma_star, result.beta_star);
  result.uncompiled_len = static_cast<int>(result.program.size());
  result.sampled_quality =
      sampled_quality(instance, result.gamma_star, result.beta_star, cfg, rng);
  return result;
}

EpisodeRecord qaoa_record(const ProblemInstance& instance,
                          const QaoaResult& result, double win_threshold) {
  EpisodeRecord rec;
  rec.instance_seed = instance.seed();
  rec.kind = std::string(to_string(instance.kind()));
  rec.program_text.reserve(result.program.size());
  for (const GateOp& gate : result.program) {
    rec.program_text.push_back(to_text(gate));
  }
  rec.rewards = {result.sampled_quality};
  rec.outcome = result.sampled_quality > win_threshold ? "won" : "lost";
  rec.score = result.sampled_quality;
  rec.agent = "qaoa";
  rec.gamma = result.gamma_star;
  rec.beta = result.beta_star;
  return rec;
}

}  // namespace qprl
