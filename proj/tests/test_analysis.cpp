#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace csqpt;
using testing_support::choose;

TEST(DiagonalBlock, IdentityAndLoss) {
  EXPECT_LT((diagonal_block(identity_tensor(5)) - RMatrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-15);
  const RMatrix m = diagonal_block(loss_channel_tensor(ChannelModel(0.62, 0.92), 7));
  for (int col = 0; col < 7; ++col) {
    EXPECT_NEAR(m.col(col).sum(), 1.0, 1e-12);
    for (int k = 0; k < 7; ++k)
      EXPECT_NEAR(m(k, col), choose(col, k) * std::pow(0.62, k) * std::pow(0.38, col - k), 1e-14);
  }
}

TEST(FitTransmissivity, InvertsAnalyticBlocks) {
  for (double eta = 0.1; eta < 0.95; eta += 0.1)
    EXPECT_NEAR(fit_transmissivity(binomial_transfer(eta, 7)), eta, 1e-6) << "eta=" << eta;
  EXPECT_NEAR(fit_transmissivity(binomial_transfer(0.62, 7)), 0.62, 1e-6);
  EXPECT_DOUBLE_EQ(fit_transmissivity(binomial_transfer(1.0, 7)), 1.0);
  EXPECT_DOUBLE_EQ(fit_transmissivity(binomial_transfer(0.0, 7)), 0.0);
  EXPECT_NEAR(fit_transmissivity(diagonal_block(loss_channel_tensor(ChannelModel(0.62, 0.92), 7))), 0.62, 1e-6);
}

TEST(FitTransmissivity, RejectsTinyBlocks) {
  EXPECT_THROW(fit_transmissivity(RMatrix::Identity(1, 1)), DegenerateBlock);
}

TEST(PhaseMap, LossChannelPhases) {
  const auto t = loss_channel_tensor(ChannelModel(0.62, 0.92), 7);
  const auto map = phase_map(t, 0, 1);
  ASSERT_FALSE(map.empty());
  for (const auto& e : map) {
    EXPECT_EQ(e.n - e.m, 1);
    EXPECT_NEAR(e.phase, 0.92, 1e-12);
  }
  for (const auto& e : phase_map(t, 0, 2)) EXPECT_NEAR(e.phase, 1.84, 1e-12);
  for (const auto& e : phase_map(t, 0, 3)) EXPECT_NEAR(e.phase, 2.76, 1e-12);
}

TEST(PhaseMap, IdentityAndErrors) {
  for (const auto& e : phase_map(identity_tensor(5), 0, 1)) EXPECT_NEAR(e.phase, 0.0, 1e-15);
  EXPECT_THROW(phase_map(identity_tensor(5), 1, 1), PreconditionError);
  EXPECT_THROW(phase_map(depolarizing_tensor(4), 0, 1), EmptyMap);
}

TEST(PhaseMap, SkipsSmallElements) {
  const auto t = loss_channel_tensor(ChannelModel(0.05, 0.4), 7);
  for (const auto& e : phase_map(t, 0, 3)) EXPECT_GE(std::abs(t(0, 3, e.m, e.n)), kPhaseMagFloor);
  EXPECT_THROW(phase_map(loss_channel_tensor(ChannelModel(0.001, 0.4), 7), 0, 3), EmptyMap);
}

TEST(FitGlobalPhase, InvertsAnalyticTensors) {
  for (double phi : {0.3, 0.92, 2.0}) {
    const auto fit = fit_global_phase(loss_channel_tensor(ChannelModel(0.62, phi), 7));
    EXPECT_NEAR(fit.phi_hat, phi, 1e-9) << "phi=" << phi;
    EXPECT_NEAR(fit.residual, 0.0, 1e-9);
  }
  EXPECT_NEAR(fit_global_phase(loss_channel_tensor(ChannelModel(0.62, 0.0), 7)).phi_hat, 0.0, 1e-12);
  EXPECT_THROW(fit_global_phase(identity_tensor(3)), PreconditionError);
}

TEST(FitGlobalPhase, LeastSquaresOnMeasuredBlockMeans) {
  const auto fit = fit_linear_phase({{0, 1, 0.9200}, {0, 2, 1.8182}, {0, 3, 2.7849}});
  EXPECT_NEAR(fit.phi_hat, 12.9111 / 14.0, 1e-12);
  EXPECT_NEAR(fit.phi_hat, 0.9222, 1e-4);
  EXPECT_GT(fit.residual, 0.0);
}

TEST(FitGlobalPhase, UnwrapsBlockMeans) {
  // Block means for phi = 2.0 on the principal branch: 2.0, 4.0 - 2pi, 6.0 - 2pi.
  const auto fit = fit_linear_phase({{0, 1, 2.0}, {0, 2, 4.0 - kTwoPi}, {0, 3, 6.0 - kTwoPi}});
  EXPECT_NEAR(fit.phi_hat, 2.0, 1e-12);
}

TEST(ProcessFidelity, EqualTensors) {
  const auto t = loss_channel_tensor(ChannelModel(0.62, 0.92), 6);
  const auto f = process_fidelity(t, t);
  EXPECT_NEAR(f.full, 1.0, 1e-9);
  EXPECT_NEAR(f.diagonal, 1.0, 1e-12);
}

TEST(ProcessFidelity, IdentityVersusLossInTwoLevels) {
  // Columns: m = 0 gives sqrt(1 * 1); m = 1 gives sqrt(0 * 0.38) + sqrt(1 * 0.62).
  const double hand = std::pow(0.5 * 1.0 + 0.5 * std::sqrt(0.62), 2);
  const auto f = process_fidelity(identity_tensor(2), loss_channel_tensor(ChannelModel(0.62, 0.0), 2));
  EXPECT_NEAR(f.diagonal, hand, 1e-12);
  EXPECT_NEAR(f.diagonal, 0.79870, 1e-5);
  EXPECT_LT(f.full, 1.0);
}

TEST(ProcessFidelity, DimensionMismatch) {
  EXPECT_THROW(process_fidelity(identity_tensor(2), identity_tensor(3)), DimensionMismatch);
}

TEST(PredictOutput, FockOneThroughLoss) {
  const auto out = predict_output(loss_channel_tensor(ChannelModel(0.62, 0.92), 7), fock_density(1, 7));
  EXPECT_NEAR(out(0, 0).real(), 0.38, 1e-12);
  EXPECT_NEAR(out(1, 1).real(), 0.62, 1e-12);
}

TEST(PredictOutput, WithWignerGrid) {
  const auto axis = linspace(-2.5, 2.5, 51);
  const auto pred = predict_output(identity_tensor(5), coherent_density(0.5, 5), axis, axis);
  EXPECT_NEAR(pred.state.trace(), 1.0, 1e-12);
  EXPECT_EQ(pred.wigner.values.rows(), 51);
  EXPECT_NEAR(pred.wigner.integral(), 1.0, 1e-4);
}

TEST(AnalyzeProcess, AnalyticLossChannel) {
  const auto t = loss_channel_tensor(ChannelModel(0.62, 0.92), 7);
  const auto a = analyze_process(t, &t);
  EXPECT_NEAR(a.eta_hat, 0.62, 1e-6);
  EXPECT_NEAR(a.phase_fit.phi_hat, 0.92, 1e-9);
  EXPECT_EQ(a.phase_maps.size(), 3u);
  EXPECT_NEAR(a.vs_model.diagonal, 1.0, 1e-9);
  ASSERT_TRUE(a.vs_reference.has_value());
  EXPECT_NEAR(a.vs_reference->full, 1.0, 1e-9);
}
