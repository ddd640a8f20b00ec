#pragma once

// Reproducible random parameter draws scattered around the fig1 values.

#include <random>

#include "ipmsim/model.hpp"

namespace ipmsim::testing {

inline ModelParameters random_parameters(std::mt19937_64& rng) {
  const auto around = [&rng](double centre) {
    return std::uniform_real_distribution<double>(0.5 * centre, 1.5 * centre)(rng);
  };
  const auto within = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  ModelParameters p;
  p.r = around(0.1);
  p.k = within(0.5, 1.5);
  p.alpha = around(0.2);
  p.phi = around(0.1);
  p.lambda = around(0.35);
  p.c1 = around(0.5);
  p.c2 = within(0.4, 0.95);
  p.d = around(0.05);
  p.delta = around(0.2);
  p.theta = within(0.4, 0.95);
  p.gamma = around(0.15);
  p.mu = around(0.3);
  p.m1 = around(0.8);
  p.m2 = around(0.6);
  return p;
}

struct RandomSameInterval {
  ModelParameters params;
  ImpulseSchedule schedule;
};

inline RandomSameInterval random_same_interval(std::mt19937_64& rng) {
  RandomSameInterval out{random_parameters(rng), {}};
  const double tau = std::uniform_real_distribution<double>(2.0, 8.0)(rng);
  out.schedule.tau1 = tau;
  out.schedule.tau2 = tau;
  out.schedule.v_i = std::uniform_real_distribution<double>(2.0, 12.0)(rng);
  out.schedule.s_i = std::uniform_real_distribution<double>(0.05, 0.3)(rng);
  return out;
}

}  // namespace ipmsim::testing
