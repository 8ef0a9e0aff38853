import numpy as np
import pytest
from scipy.stats import kstest, norm

from helpers import BallModel, FlatModel
from umsa.kernels import (
    ChainState,
    CoupledState,
    PcnParams,
    couple_reflection_maximal,
    couple_synchronous,
    coupled_mh_step,
    make_chain_state,
    mh_step,
    pcn_propose,
    proposal_log_correction,
)


class TestPcnParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            PcnParams(rho=1.0, sigma=np.eye(2))
        with pytest.raises(ValueError):
            PcnParams(rho=0.5, sigma=np.zeros((2, 2)))
        with pytest.raises(ValueError):
            PcnParams(rho=0.5, sigma=np.ones((2, 3)))

    def test_same_proposal(self):
        a = PcnParams.isotropic(0.9, 2.0, 3)
        b = PcnParams.isotropic(0.9, 2.0, 3)
        c = PcnParams.isotropic(0.8, 2.0, 3)
        assert a.same_proposal(b) and not a.same_proposal(c)


class TestPropose:
    def test_zero_innovation(self):
        params = PcnParams.isotropic(0.7, 3.0, 2)
        u = np.array([1.0, -2.0])
        assert np.allclose(pcn_propose(u, params, np.zeros(2)), 0.7 * u)

    def test_independence_limit(self):
        params = PcnParams.isotropic(0.0, 3.0, 2)
        z = np.array([0.5, -0.25])
        assert np.allclose(pcn_propose(np.array([9.0, 9.0]), params, z), 3.0 * z)

    def test_proposal_covariance(self):
        sigma = np.array([[2.0, 0.0], [0.5, 1.0]])
        params = PcnParams(rho=0.6, sigma=sigma)
        rng = np.random.default_rng(0)
        u = np.array([1.0, 2.0])
        draws = np.array(
            [pcn_propose(u, params, rng.standard_normal(2)) for _ in range(100_000)]
        )
        target = (1 - 0.6**2) * sigma @ sigma.T
        got = np.cov(draws.T)
        assert np.abs(got - target).max() / np.abs(target).max() < 0.05


class TestCorrection:
    def test_prior_reversibility(self):
        # with Sigma equal to the prior covariance the proposal is
        # prior-reversible: prior ratio plus correction cancels exactly
        prior_var = 16.0
        params = PcnParams.isotropic(0.95, 4.0, 2)
        rng = np.random.default_rng(1)
        for _ in range(20):
            u = rng.normal(size=2) * 4
            u_new = pcn_propose(u, params, rng.standard_normal(2))
            log_prior_ratio = (u @ u - u_new @ u_new) / (2 * prior_var)
            assert log_prior_ratio + proposal_log_correction(u, u_new, params) == (
                pytest.approx(0.0, abs=1e-10)
            )

    def test_zero_for_symmetric_case(self):
        # rho = 0 with equal norms gives no correction
        params = PcnParams.isotropic(0.0, 2.0, 2)
        u = np.array([1.0, 0.0])
        v = np.array([0.0, -1.0])
        assert proposal_log_correction(u, v, params) == pytest.approx(0.0, abs=1e-14)


class TestMhStep:
    def test_always_accepts_on_flat_target_with_symmetric_proposal(self):
        # rho = 0.95 on a flat target: ratio = correction only; run from 0
        # where the correction is symmetric for +-z, so over many steps the
        # chain must accept roughly per the correction; the exact alpha = 1
        # case is z = 0 which needs a crafted stream, so check directly:
        model = FlatModel()
        params = PcnParams.isotropic(0.0, 1.0, 2)
        state = make_chain_state(model, np.array([1.0]), np.zeros(2), 0)
        # proposal lands back at the same norm -> alpha = 1 regardless of v
        class _Rng:
            def standard_normal(self, d):
                return np.zeros(d)

            def uniform(self):
                return 1.0 - 1e-12

        new_state, accepted = mh_step(model, np.array([1.0]), 0, state, params, _Rng())
        assert accepted

    def test_minus_inf_proposal_always_rejected(self):
        model = BallModel(radius=1.0)
        params = PcnParams.isotropic(0.0, 100.0, 2)  # proposals fly out of the ball
        rng = np.random.default_rng(3)
        state = make_chain_state(model, np.array([1.0]), np.zeros(2), 0)
        rejected = 0
        for _ in range(200):
            new_state, accepted = mh_step(model, np.array([1.0]), 0, state, params, rng)
            if np.linalg.norm(new_state.u) > 1.0:
                pytest.fail("accepted a zero-density proposal")
            rejected += not accepted
        assert rejected > 150  # nearly all proposals leave the ball

    def test_stream_consumption_contract(self):
        model = FlatModel(d_u=3)
        params = PcnParams.isotropic(0.5, 1.0, 3)
        state = make_chain_state(model, np.array([1.0]), np.zeros(3), 0)
        rng = np.random.default_rng(7)
        shadow = np.random.default_rng(7)
        mh_step(model, np.array([1.0]), 0, state, params, rng)
        shadow.standard_normal(3)
        shadow.uniform()
        assert rng.uniform() == shadow.uniform()


class TestSynchronousCoupling:
    def test_identical_inputs_give_identical_proposals(self):
        params = PcnParams.isotropic(0.9, 2.0, 2)
        u = np.array([0.3, -0.7])
        z = np.array([1.0, 0.5])
        a, b = couple_synchronous(u, u.copy(), params, params, z)
        assert np.array_equal(a, b)

    def test_marginals_equal_single_proposal(self):
        p1 = PcnParams.isotropic(0.9, 2.0, 2)
        p2 = PcnParams.isotropic(0.5, 1.0, 2)
        u1 = np.array([0.3, -0.7])
        u2 = np.array([1.0, 1.0])
        z = np.array([-0.2, 0.4])
        a, b = couple_synchronous(u1, u2, p1, p2, z)
        assert np.array_equal(a, pcn_propose(u1, p1, z))
        assert np.array_equal(b, pcn_propose(u2, p2, z))

    def test_component_correlation_near_one(self):
        params = PcnParams.isotropic(0.9, 2.0, 1)
        rng = np.random.default_rng(11)
        u = np.array([0.5])
        pairs = np.array(
            [
                np.concatenate(
                    couple_synchronous(u, u, params, params, rng.standard_normal(1))
                )
                for _ in range(100_000)
            ]
        )
        corr = np.corrcoef(pairs.T)[0, 1]
        assert corr > 0.999999


class TestReflectionCoupling:
    def test_zero_gap_meets(self):
        params = PcnParams.isotropic(0.9, 1.0, 2)
        u = np.array([0.4, 0.2])
        a, b, met = couple_reflection_maximal(u, u.copy(), params, np.array([1.0, -1.0]), 0.99)
        assert met and np.array_equal(a, b)

    def test_fine_marginal_is_plain_proposal(self):
        params = PcnParams.isotropic(0.8, 1.5, 2)
        u1 = np.array([1.0, 0.0])
        u2 = np.array([-1.0, 0.5])
        z = np.array([0.3, -0.6])
        a, _, _ = couple_reflection_maximal(u1, u2, params, z, 0.5)
        assert np.array_equal(a, pcn_propose(u1, params, z))

    def test_coarse_marginal_distribution(self):
        params = PcnParams.isotropic(0.8, 1.5, 2)
        u1 = np.array([1.0, 0.0])
        u2 = np.array([-1.0, 0.5])
        rng = np.random.default_rng(5)
        draws = np.array(
            [
                couple_reflection_maximal(
                    u1, u2, params, rng.standard_normal(2), rng.uniform()
                )[1]
                for _ in range(100_000)
            ]
        )
        scale = np.sqrt(1 - 0.8**2) * 1.5
        for k in range(2):
            stat = kstest(draws[:, k], norm(loc=0.8 * u2[k], scale=scale).cdf)
            assert stat.pvalue > 0.01

    def test_meet_probability_matches_total_variation(self):
        # 1-d: P(meet) = 2 Phi(-|mean gap| / (2 sd))
        params = PcnParams.isotropic(0.7, 1.2, 1)
        u1, u2 = np.array([1.5]), np.array([-0.5])
        sd = np.sqrt(1 - 0.7**2) * 1.2
        p_meet = 2 * norm.cdf(-abs(0.7 * (u1[0] - u2[0])) / (2 * sd))
        rng = np.random.default_rng(13)
        n = 100_000
        met = sum(
            couple_reflection_maximal(
                u1, u2, params, rng.standard_normal(1), rng.uniform()
            )[2]
            for _ in range(n)
        )
        se = np.sqrt(p_meet * (1 - p_meet) / n)
        assert abs(met / n - p_meet) <= 3 * se


class TestCoupledMhStep:
    @staticmethod
    def _pair(model, thetas, u, levels):
        return CoupledState(
            fine=make_chain_state(model, thetas[0], u, levels[0]),
            coarse=make_chain_state(model, thetas[1], u.copy(), levels[1]),
        )

    def test_identical_dynamics_stay_identical(self, elliptic_model):
        theta = np.array([100.0])
        params = PcnParams.isotropic(0.99, 0.3, 2)
        pair = self._pair(elliptic_model, (theta, theta), np.array([0.4, -0.5]), (4, 4))
        rng = np.random.default_rng(17)
        for _ in range(100):
            pair, _, _ = coupled_mh_step(
                elliptic_model, (theta, theta), 4, 4, pair, params, params,
                "synchronous", rng,
            )
            assert np.array_equal(pair.fine.u, pair.coarse.u)

    def test_shared_uniform_can_split_decisions(self, elliptic_model):
        # different levels: eventually exactly one component accepts a move
        theta = np.array([100.0])
        params = PcnParams.isotropic(0.99, 0.3, 2)
        pair = self._pair(elliptic_model, (theta, theta), np.array([0.4, -0.5]), (5, 2))
        rng = np.random.default_rng(23)
        split = False
        for _ in range(500):
            pair, accepted, _ = coupled_mh_step(
                elliptic_model, (theta, theta), 5, 2, pair, params, params,
                "synchronous", rng,
            )
            if accepted[0] != accepted[1]:
                split = True
                break
        assert split

    def test_reflection_requires_shared_params(self, elliptic_model):
        theta = np.array([100.0])
        pair = self._pair(elliptic_model, (theta, theta), np.array([0.4, -0.5]), (4, 3))
        with pytest.raises(ValueError):
            coupled_mh_step(
                elliptic_model, (theta, theta), 4, 3, pair,
                PcnParams.isotropic(0.9, 1.0, 2), PcnParams.isotropic(0.8, 1.0, 2),
                "reflection", np.random.default_rng(0), np.random.default_rng(1),
            )

    def test_met_then_synchronous_stays_equal(self, elliptic_model):
        # run reflection at equal (theta, level) until the pair meets, then
        # continue synchronously: the components never separate again
        theta = np.array([100.0])
        params = PcnParams.isotropic(0.99, 0.3, 2)
        pair = self._pair(
            elliptic_model, (theta, theta), np.array([2.0, 1.0]), (4, 4)
        )
        pair.coarse = make_chain_state(elliptic_model, theta, np.array([-1.0, 0.5]), 4)
        rng = np.random.default_rng(29)
        crng = np.random.default_rng(31)
        met_and_equal = False
        for _ in range(2000):
            pair, _, met = coupled_mh_step(
                elliptic_model, (theta, theta), 4, 4, pair, params, params,
                "reflection", rng, crng,
            )
            if met and np.array_equal(pair.fine.u, pair.coarse.u):
                met_and_equal = True
                break
        assert met_and_equal
        for _ in range(200):
            pair, _, _ = coupled_mh_step(
                elliptic_model, (theta, theta), 4, 4, pair, params, params,
                "synchronous", rng,
            )
            assert np.array_equal(pair.fine.u, pair.coarse.u)
