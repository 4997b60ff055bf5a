// model.hpp — first-quantized operators of the measured two-leg ladder

#pragma once

#include <cmath>
#include <vector>

#include "lse/common.hpp"

namespace lse {

/// One measurement-feedback channel. `a` holds the creation coefficients
/// of the measured mode (two nonzeros on neighboring rungs of one leg);
/// `phase_site` is the flattened site whose occupation controls the
/// conditional pi-phase feedback.
struct JumpChannel {
  Leg leg;
  int rung;        // 0-based, in [0, N-2]
  Vec a;           // length 2N, unit norm
  int phase_site;  // flat_index(rung + 1, leg)
};

/// Two-leg ladder Hamiltonian: hopping t along each leg (open ends),
/// hopping delta across each rung.
inline Mat build_h0(const LadderConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_sites();
  Mat h = Mat::Zero(n, n);
  for (int j = 0; j + 1 < cfg.n_rungs; ++j) {
    for (Leg leg : {Leg::A, Leg::B}) {
      const int s0 = flat_index(j, leg);
      const int s1 = flat_index(j + 1, leg);
      h(s0, s1) += cfg.t;
      h(s1, s0) += cfg.t;
    }
  }
  for (int j = 0; j < cfg.n_rungs; ++j) {
    h(flat_index(j, Leg::A), flat_index(j, Leg::B)) += cfg.delta;
    h(flat_index(j, Leg::B), flat_index(j, Leg::A)) += cfg.delta;
  }
  return h;
}

/// Non-Hermitian generator of the no-jump evolution. Leg A hops become
/// asymmetric (t + gamma/4 rightward, t - gamma/4 leftward), leg B the
/// mirror image, and every site acquires -i*gamma/4 per channel touching
/// it (so -i*gamma/2 in the bulk, -i*gamma/4 on edge rungs).
inline Mat build_heff(const LadderConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_sites();
  Mat h = Mat::Zero(n, n);
  const double g4 = cfg.gamma / 4.0;
  for (int j = 0; j + 1 < cfg.n_rungs; ++j) {
    const int a0 = flat_index(j, Leg::A), a1 = flat_index(j + 1, Leg::A);
    const int b0 = flat_index(j, Leg::B), b1 = flat_index(j + 1, Leg::B);
    h(a0, a1) += cfg.t + g4;
    h(a1, a0) += cfg.t - g4;
    h(b0, b1) += cfg.t - g4;
    h(b1, b0) += cfg.t + g4;
    for (int s : {a0, a1, b0, b1}) h(s, s) += -kI * g4;
  }
  for (int j = 0; j < cfg.n_rungs; ++j) {
    h(flat_index(j, Leg::A), flat_index(j, Leg::B)) += cfg.delta;
    h(flat_index(j, Leg::B), flat_index(j, Leg::A)) += cfg.delta;
  }
  return h;
}

/// Channels in fixed global order: rung-major, A before B. This order is
/// also the jump application order in the trajectory engine.
inline std::vector<JumpChannel> build_jump_channels(const LadderConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_sites();
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<JumpChannel> channels;
  channels.reserve(cfg.n_channels());
  for (int j = 0; j + 1 < cfg.n_rungs; ++j) {
    {
      JumpChannel ch{Leg::A, j, Vec::Zero(n), flat_index(j + 1, Leg::A)};
      ch.a(flat_index(j, Leg::A)) = r;
      ch.a(flat_index(j + 1, Leg::A)) = -kI * r;
      channels.push_back(std::move(ch));
    }
    {
      JumpChannel ch{Leg::B, j, Vec::Zero(n), flat_index(j + 1, Leg::B)};
      ch.a(flat_index(j, Leg::B)) = r;
      ch.a(flat_index(j + 1, Leg::B)) = kI * r;
      channels.push_back(std::move(ch));
    }
  }
  return channels;
}

/// Single-particle-sector matrix of a jump operator:
/// (I - 2 e_p e_p^dag) a a^dag, rank 1.
inline Mat jump_sp_matrix(const JumpChannel& ch) {
  Vec phased = ch.a;
  phased(ch.phase_site) = -phased(ch.phase_site);
  return phased * ch.a.adjoint();
}

/// Rotation about the ladder center: site (j, A) -> (N-1-j, B).
/// Returns the permutation as an index map, perm[old] = new.
inline std::vector<int> rotation_permutation(int n_rungs) {
  std::vector<int> perm(2 * n_rungs);
  for (int j = 0; j < n_rungs; ++j) {
    perm[flat_index(j, Leg::A)] = flat_index(n_rungs - 1 - j, Leg::B);
    perm[flat_index(j, Leg::B)] = flat_index(n_rungs - 1 - j, Leg::A);
  }
  return perm;
}

inline Mat permutation_matrix(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  Mat p = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) p(perm[i], i) = 1.0;
  return p;
}

}  // namespace lse
