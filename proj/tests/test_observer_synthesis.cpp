#include <gtest/gtest.h>

#include "qobs/observer_synthesis.hpp"
#include "qobs/simulation.hpp"
#include "support/random_systems.hpp"

namespace qobs {
namespace {

using testing::Rng;

Matrix printed_r_c_tilde() {
    Matrix m(4, 2);
    m << -1, -1, -1, -1, -1, 1, -1, 1;
    return m;
}

TEST(ObserverOrder, PadsOddOutputCounts) {
    EXPECT_EQ(observer_order(1), 2);
    EXPECT_EQ(observer_order(2), 2);
    EXPECT_EQ(observer_order(3), 4);
    EXPECT_EQ(observer_order(4), 4);
}

TEST(Synthesis, SixModeUnitObserver) {
    const auto rp = testing::six_mode_plant();
    const ObserverDesign obs = synthesize_observer(rp.plant, rp.decomposition, testing::unit_observer_options());
    EXPECT_EQ(obs.n_o, 2);
    EXPECT_EQ(obs.r_c_tilde, printed_r_c_tilde());
    EXPECT_EQ(obs.design_residual, 0.0);
    Matrix stacked = Matrix::Zero(6, 2);
    stacked.bottomRows(4) = printed_r_c_tilde();
    EXPECT_LE(max_abs(rp.decomposition.p.transpose() * obs.r_c - stacked), 1e-12);
    EXPECT_LE(max_abs(obs.r_c - rp.decomposition.p * stacked), 1e-15);
    EXPECT_TRUE(obs.theta_o.is_canonical());
}

TEST(Synthesis, SixModeDefaultsSatisfyDesignEquation) {
    const auto rp = testing::six_mode_plant();
    const ObserverDesign obs = synthesize_observer(rp.plant, rp.decomposition);
    EXPECT_EQ(obs.r_o, Matrix::Identity(2, 2));
    EXPECT_EQ(obs.c_o, Matrix::Identity(2, 2));
    EXPECT_EQ(obs.beta, -Matrix::Identity(2, 2));
    EXPECT_EQ(-obs.c_o * obs.r_o.inverse() * obs.beta, Matrix::Identity(2, 2));
    EXPECT_EQ(obs.design_residual, 0.0);
}

TEST(Synthesis, SingleOutputIsPadded) {
    Matrix c(1, 2);
    c << 1, 0;
    const auto plant = make_plant(1, Matrix::Zero(2, 2), c);
    const ObserverDesign obs = synthesize_observer(plant, decompose_plant(plant));
    EXPECT_EQ(obs.n_o, 2);
    Matrix beta(2, 1);
    beta << -1, 0;
    Matrix c_o(1, 2);
    c_o << 1, 0;
    Matrix r_c_tilde(2, 2);
    r_c_tilde << -1, 0, 0, 0;
    EXPECT_EQ(obs.beta, beta);
    EXPECT_EQ(obs.c_o, c_o);
    EXPECT_EQ(obs.r_c_tilde, r_c_tilde);
}

TEST(Synthesis, StiffnessScalesDefaults) {
    const auto rp = testing::six_mode_plant();
    ObserverOptions opts;
    opts.omega = 2.5;
    const ObserverDesign obs = synthesize_observer(rp.plant, rp.decomposition, opts);
    EXPECT_EQ(obs.r_o, 2.5 * Matrix::Identity(2, 2));
    EXPECT_EQ(obs.beta, -2.5 * Matrix::Identity(2, 2));
    EXPECT_LE(obs.design_residual, 1e-15);
}

TEST(Synthesis, RefusesPlantsFailingConditions) {
    Rng rng(1);
    const auto plant = testing::random_generic_plant(rng, 3, 2);
    try {
        (void)synthesize_observer(plant, decompose_plant(plant));
        FAIL() << "expected SynthesisError";
    } catch (const SynthesisError& e) {
        ASSERT_TRUE(e.report().has_value());
        EXPECT_FALSE(e.report()->all_ok());
    }
}

TEST(Synthesis, RefusesBoundViolation) {
    const auto rp = testing::six_mode_plant();
    const auto wide = realize_output(rp.plant.theta, rp.plant.r, Matrix::Identity(4, 4));
    const ConditionReport rep = check_plant_conditions(wide.plant);
    EXPECT_FALSE(rep.bound_ok);
    EXPECT_THROW((void)synthesize_observer(wide.plant, wide.decomposition), SynthesisError);
}

TEST(Synthesis, RefusesFullRankHamiltonian) {
    Rng rng(2);
    const auto plant = make_plant(2, testing::random_spd(4, rng), Matrix::Zero(1, 4));
    EXPECT_THROW((void)synthesize_observer(plant, decompose_plant(plant)), SynthesisError);
}

TEST(Synthesis, RefusesInconsistentObserverMatrices) {
    const auto rp = testing::six_mode_plant();
    const auto& plant = rp.plant;
    const auto& dec = rp.decomposition;

    ObserverOptions wrong_sign = testing::unit_observer_options();
    wrong_sign.beta = Matrix::Identity(2, 2);
    EXPECT_THROW((void)synthesize_observer(plant, dec, wrong_sign), SynthesisError);

    ObserverOptions indefinite = testing::unit_observer_options();
    indefinite.r_o = Matrix::Identity(2, 2);
    (*indefinite.r_o)(1, 1) = -1.0;
    EXPECT_THROW((void)synthesize_observer(plant, dec, indefinite), SynthesisError);

    ObserverOptions bad_shape = testing::unit_observer_options();
    bad_shape.beta = -Matrix::Identity(3, 2);
    EXPECT_THROW((void)synthesize_observer(plant, dec, bad_shape), SynthesisError);

    ObserverOptions bad_omega;
    bad_omega.omega = 0.0;
    EXPECT_THROW((void)synthesize_observer(plant, dec, bad_omega), SynthesisError);
}

TEST(Synthesis, RandomDesignsKeepOutputsConstant) {
    Rng rng(555);
    for (int trial = 0; trial < 50; ++trial) {
        const auto plant = testing::random_valid_plant(rng);
        const DecomposedPlant dec = decompose_plant(plant);
        const ObserverOptions opts = trial % 2 == 0 ? ObserverOptions{} : testing::random_observer_options(plant.m(), rng);
        const ObserverDesign obs = synthesize_observer(plant, dec, opts);
        EXPECT_LE(obs.design_residual, kDesignTol);
        EXPECT_LE(design_equation_residual(obs.r_o, obs.c_o, obs.beta), kDesignTol);
        EXPECT_LE(max_abs(dec.c_p2_tilde * dec.theta22 * obs.r_c_tilde), 1e-9) << "trial " << trial;
        EXPECT_EQ(obs.r_c_tilde, dec.c_p2_tilde.transpose() * obs.beta.transpose());
    }
}

TEST(SteadyState, SixModeUnitObserver) {
    const auto rp = testing::six_mode_plant();
    const ObserverDesign obs = synthesize_observer(rp.plant, rp.decomposition, testing::unit_observer_options());
    const Vector e1 = Vector::Unit(2, 0);
    EXPECT_EQ(predict_steady_state(obs, e1), e1);
    EXPECT_EQ(obs.c_o * predict_steady_state(obs, e1), e1);
    EXPECT_EQ(predict_steady_state(obs, Vector::Zero(2)), Vector::Zero(2));
}

TEST(SteadyState, ObserverOutputReproducesPlantOutput) {
    Rng rng(71);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 1 + trial % 2;
        const ObserverOptions opts = testing::random_observer_options(m, rng);
        ObserverDesign obs;
        obs.n_o = observer_order(m);
        obs.m = m;
        obs.r_o = *opts.r_o;
        obs.c_o = *opts.c_o;
        obs.beta = *opts.beta;
        const Vector z = testing::gaussian(m, 1, rng);
        const Vector x = -obs.r_o.llt().solve(obs.beta * z);
        EXPECT_LE((predict_steady_state(obs, z) - x).norm(), 1e-10 * (1.0 + x.norm()));
        EXPECT_LE((obs.c_o * predict_steady_state(obs, z) - z).norm(), 1e-9 * (1.0 + z.norm()));
    }
}

TEST(Augmented, SixModeAssembly) {
    const auto rp = testing::six_mode_plant();
    const ObserverDesign obs = synthesize_observer(rp.plant, rp.decomposition, testing::unit_observer_options());
    const AugmentedSystem aug = assemble_augmented(rp.plant, obs);
    ASSERT_EQ(aug.dim(), 8);
    EXPECT_EQ(aug.r_a.topLeftCorner(6, 6), rp.plant.r);
    EXPECT_EQ(aug.r_a.topRightCorner(6, 2), obs.r_c);
    EXPECT_EQ(aug.r_a.bottomLeftCorner(2, 6), obs.r_c.transpose());
    EXPECT_EQ(aug.r_a.bottomRightCorner(2, 2), obs.r_o);
    EXPECT_EQ(aug.r_a, aug.r_a.transpose());
    EXPECT_EQ(aug.a_a, 2.0 * aug.theta_a.matrix() * aug.r_a);
    const Matrix& t = aug.theta_a.matrix();
    EXPECT_LE(max_abs(aug.a_a * t + t * aug.a_a.transpose()), 1e-12);
    EXPECT_EQ(aug.zp_selector.rows(), 2);
    EXPECT_EQ(aug.zp_selector.cols(), 8);
    EXPECT_EQ(aug.zo_selector.cols(), 8);
    EXPECT_EQ(aug.zp_selector.leftCols(6), rp.plant.c);
    EXPECT_EQ(aug.zo_selector.rightCols(2), obs.c_o);

    // In rotated plant coordinates the constant rows see the observer only.
    Matrix rot = Matrix::Identity(8, 8);
    rot.topLeftCorner(6, 6) = rp.decomposition.p;
    const Matrix at = rot.transpose() * aug.a_a * rot;
    EXPECT_LE(max_abs(at.block(2, 0, 4, 6)), 1e-12);
    EXPECT_LE(max_abs(at.block(2, 6, 4, 2) - 2.0 * rp.decomposition.theta22 * obs.r_c_tilde), 1e-12);
}

TEST(Augmented, ZeroCouplingIsBlockDiagonal) {
    const auto rp = testing::six_mode_plant();
    const ObserverDesign obs = without_coupling(synthesize_observer(rp.plant, rp.decomposition));
    const AugmentedSystem aug = assemble_augmented(rp.plant, obs);
    EXPECT_EQ(aug.a_a.topRightCorner(6, 2), Matrix::Zero(6, 2));
    EXPECT_EQ(aug.a_a.bottomLeftCorner(2, 6), Matrix::Zero(2, 6));
    EXPECT_EQ(aug.a_a.bottomRightCorner(2, 2), 2.0 * make_commutation_matrix(1).matrix());
}

TEST(Augmented, ZeroHamiltonianPlantCouplesOnlyThroughRc) {
    Matrix c(1, 4);
    c << 1, 0, 0, 0;
    const auto plant = make_plant(2, Matrix::Zero(4, 4), c);
    const ObserverDesign obs = synthesize_observer(plant, decompose_plant(plant));
    const AugmentedSystem aug = assemble_augmented(plant, obs);
    EXPECT_EQ(aug.a_a.topLeftCorner(4, 4), Matrix::Zero(4, 4));
    EXPECT_EQ(aug.a_a.topRightCorner(4, 2), 2.0 * plant.theta.matrix() * obs.r_c);
}

TEST(Augmented, RejectsMismatchedObserver) {
    const auto rp = testing::six_mode_plant();
    ObserverDesign obs = synthesize_observer(rp.plant, rp.decomposition);
    obs.r_c = Matrix::Zero(4, 2);
    EXPECT_THROW((void)assemble_augmented(rp.plant, obs), DimensionError);
}

TEST(ErrorDynamics, PropagatorNormBound) {
    Rng rng(909);
    for (int trial = 0; trial < 60; ++trial) {
        const int n_o = 2 * (1 + trial % 3);
        const Matrix r_o = testing::random_spd(n_o, rng, 0.1, 3.0);
        const Matrix theta = make_commutation_matrix(n_o / 2).matrix();
        Eigen::SelfAdjointEigenSolver<Matrix> eig(r_o);
        const double bound = std::sqrt(eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff());
        for (double t : {0.1, 1.0, 10.0, 100.0}) {
            const Matrix e = matrix_exponential(2.0 * theta * r_o * t);
            Eigen::JacobiSVD<Matrix> svd(e);
            EXPECT_LE(svd.singularValues()(0), bound + 1e-8) << "trial " << trial << " t " << t;
        }
    }
}

TEST(ErrorDynamics, EnergyConservedUnderRk4) {
    Rng rng(314);
    for (int trial = 0; trial < 10; ++trial) {
        const int n_o = 2 * (1 + trial % 2);
        const Matrix r_o = testing::random_spd(n_o, rng);
        const Matrix a = 2.0 * make_commutation_matrix(n_o / 2).matrix() * r_o;
        Vector x = testing::gaussian(n_o, 1, rng);
        const double e0 = 0.5 * x.dot(r_o * x);
        const double dt = 1e-3;
        double drift = 0.0;
        for (int k = 0; k < 10000; ++k) {
            const Vector k1 = a * x;
            const Vector k2 = a * (x + 0.5 * dt * k1);
            const Vector k3 = a * (x + 0.5 * dt * k2);
            const Vector k4 = a * (x + dt * k3);
            x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            drift = std::max(drift, std::abs(0.5 * x.dot(r_o * x) - e0));
        }
        EXPECT_LE(drift, 1e-8) << "trial " << trial;
    }
}

}  // namespace
}  // namespace qobs
