import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import wavedmd as wd
from wavedmd import wave
from wavedmd.errors import WaveOverflowError

from conftest import random_connected_graph


@pytest.fixture(scope="module")
def two_node():
    return wd.make_graph(2, [(0, 1, 1.0)])


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("c", [0.0, -0.5, np.sqrt(2.0), 1.5])
def test_wave_config_rejects_bad_speed(c):
    with pytest.raises(ValueError):
        wd.WaveConfig(t_max=10, c=c)


def test_wave_config_rejects_short_trace():
    with pytest.raises(ValueError):
        wd.WaveConfig(t_max=1)


# ---------------------------------------------------------------------------
# step_local
# ---------------------------------------------------------------------------


def test_step_local_hand_example():
    # 2-node unit graph, c=1, u(0)=[1,0], u(-1)=u(0): node 0 update
    value = wd.step_local(1.0, 1.0, [(1.0, 1.0), (-1.0, 0.0)], 1.0)
    assert value == 2.0 * 1.0 - 1.0 - (1.0 * 1.0 + (-1.0) * 0.0)
    assert value == 0.0


def test_step_local_zero_fixed_point():
    assert wd.step_local(0.0, 0.0, [(1.0, 0.0), (-0.5, 0.0)], 0.9) == 0.0


@given(st.floats(min_value=-5, max_value=5, allow_nan=False))
def test_step_local_preserves_constant_state(k):
    # Laplacian rows sum to zero, so a constant state is a fixed point
    neighbors = [(1.0, k), (-0.25, k), (-0.75, k)]
    assert wd.step_local(k, k, neighbors, 1.2) == pytest.approx(k, abs=1e-12)


def test_propagate_matches_step_local_per_node(two_node):
    g = random_connected_graph(99, n_lo=5, n_hi=8)
    lap = wd.build_laplacian(g).dense()
    cfg = wd.WaveConfig(t_max=30, c=1.1)
    tm = wd.propagate(g, cfg, seed=4)
    u0 = tm.values[:, 0]
    u_prev2, u_prev = u0.copy(), u0.copy()
    for t in range(1, 30):
        u_t = np.array(
            [
                wd.step_local(
                    u_prev[i],
                    u_prev2[i],
                    [(lap[i, j], u_prev[j]) for j in range(g.n) if lap[i, j] != 0.0],
                    1.1,
                )
                for i in range(g.n)
            ]
        )
        assert np.allclose(u_t, tm.values[:, t], atol=1e-12, rtol=0)
        u_prev2, u_prev = u_prev, u_t


# ---------------------------------------------------------------------------
# propagate
# ---------------------------------------------------------------------------


def test_propagate_two_node_hand_iteration(two_node):
    cfg = wd.WaveConfig(t_max=4, c=1.0, u0=np.array([1.0, 0.0]))
    tm = wd.propagate(two_node, cfg)
    expected = np.array([[1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 1.0, 0.0]])
    assert np.array_equal(tm.values, expected)


def test_propagate_constant_mode(two_node):
    cfg = wd.WaveConfig(t_max=10, c=0.8, u0=np.full(2, 3.25))
    tm = wd.propagate(two_node, cfg)
    assert np.allclose(tm.values, 3.25, atol=1e-12)


def test_propagate_deterministic(karate):
    cfg = wd.WaveConfig(t_max=64)
    a = wd.propagate(karate, cfg, seed=123)
    b = wd.propagate(karate, cfg, seed=123)
    assert np.array_equal(a.values, b.values)
    c = wd.propagate(karate, cfg, seed=124)
    assert not np.array_equal(a.values, c.values)


def test_propagate_initial_condition_in_unit_interval(karate):
    tm = wd.propagate(karate, wd.WaveConfig(t_max=2), seed=9)
    assert np.all(tm.values[:, 0] >= 0.0)
    assert np.all(tm.values[:, 0] < 1.0)


def test_propagate_overflow_guard(two_node, monkeypatch):
    monkeypatch.setattr(wave, "_BLOWUP_FACTOR", 1e-9)
    with pytest.raises(WaveOverflowError):
        wd.propagate(two_node, wd.WaveConfig(t_max=50), seed=0)


def test_propagate_rejects_wrong_u0_shape(two_node):
    with pytest.raises(ValueError):
        wd.propagate(two_node, wd.WaveConfig(t_max=4, u0=np.ones(3)))


def test_trace_csv_roundtrip(karate):
    tm = wd.propagate(karate, wd.WaveConfig(t_max=8), seed=2)
    text = tm.to_csv()
    parsed = np.array(
        [[float(x) for x in line.split(",")] for line in text.strip().splitlines()]
    )
    assert np.array_equal(parsed, tm.values)


# ---------------------------------------------------------------------------
# companion matrix oracle
# ---------------------------------------------------------------------------


def test_build_M_block_structure(two_node):
    lap = wd.build_laplacian(two_node).dense()
    m = wd.build_M(two_node, 1.0).dense()
    assert np.array_equal(m[:2, :2], 2 * np.eye(2) - lap)
    assert np.array_equal(m[:2, 2:], -np.eye(2))
    assert np.array_equal(m[2:, :2], np.eye(2))
    assert np.array_equal(m[2:, 2:], np.zeros((2, 2)))


def test_build_M_two_node_eigenvalues(two_node):
    # oracle: numeric eigendecomposition of the hand-assembled 4x4 matrix
    hand = np.array(
        [
            [1.0, 1.0, -1.0, 0.0],
            [1.0, 1.0, 0.0, -1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ]
    )
    expected = np.linalg.eigvals(hand)
    got = wd.build_M(two_node, 1.0).eigenvalues()
    for target in [1.0, 1.0, 1j, -1j]:
        assert min(abs(got - target)) < 1e-6
    assert np.allclose(np.sort_complex(expected), np.sort_complex(got), atol=1e-9)


@pytest.mark.parametrize("c", [0.5, 1.0, 1.4])
def test_unit_circle_spectrum(c):
    for seed in range(3):
        g = random_connected_graph(seed)
        alphas = wd.build_M(g, c).eigenvalues()
        assert np.max(np.abs(np.abs(alphas) - 1.0)) <= 1e-9


def test_build_M_rejects_bad_speed(two_node):
    with pytest.raises(ValueError):
        wd.build_M(two_node, 1.5)


def test_oracle_equivalence_small_graphs():
    for seed in range(5):
        g = random_connected_graph(seed)
        c = [0.5, 1.0, 1.4][seed % 3]
        tm = wd.propagate(g, wd.WaveConfig(t_max=101, c=c), seed=seed)
        oracle = wd.build_M(g, c).trace(tm.values[:, 0], 101)
        assert np.max(np.abs(tm.values - oracle)) <= 1e-10


# ---------------------------------------------------------------------------
# recurrence roots
# ---------------------------------------------------------------------------


def test_alpha_at_lambda_zero():
    for c in [0.1, 0.7, 1.4]:
        assert wd.alpha_from_lambda(0.0, c) == (1.0 + 0.0j, 1.0 - 0.0j)


def test_alpha_at_lambda_two_unit_speed():
    a1, a2 = wd.alpha_from_lambda(2.0, 1.0)
    assert a1 == pytest.approx(1j, abs=1e-12)
    assert a2 == pytest.approx(-1j, abs=1e-12)


def test_alpha_roundtrip_random():
    rng = np.random.default_rng(0)
    for _ in range(100):
        lam = float(rng.uniform(0.0, 2.0))
        c = float(rng.uniform(0.05, 1.41))
        a1, a2 = wd.alpha_from_lambda(lam, c)
        assert abs(abs(a1) - 1.0) <= 1e-12
        assert a2 == a1.conjugate()
        omega = np.angle(a1)
        assert wd.lambda_from_omega(omega, c) == pytest.approx(lam, abs=1e-12)


def test_alpha_domain_errors():
    with pytest.raises(ValueError):
        wd.alpha_from_lambda(2.5, 1.0)
    with pytest.raises(ValueError):
        wd.alpha_from_lambda(-0.1, 1.0)
    with pytest.raises(ValueError):
        wd.alpha_from_lambda(1.0, 1.5)


# ---------------------------------------------------------------------------
# closed-form solution
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def ring():
    return wd.make_graph(8, [(i, (i + 1) % 8, 1.0) for i in range(8)])


def test_closed_form_matches_propagation_on_ring(ring):
    u0 = np.random.default_rng(5).random(8)
    tm = wd.propagate(ring, wd.WaveConfig(t_max=64, c=1.0, u0=u0))
    for t in range(64):
        assert np.max(np.abs(wd.closed_form_trace(ring, u0, 1.0, t) - tm.values[:, t])) <= 1e-9


def test_closed_form_constant_mode(ring):
    u0 = np.ones(8)
    for t in [0, 1, 7, 40]:
        assert np.allclose(wd.closed_form_trace(ring, u0, 1.2, t), 1.0, atol=1e-9)


def test_closed_form_identity_at_t_zero(ring):
    u0 = np.random.default_rng(11).random(8)
    assert np.allclose(wd.closed_form_trace(ring, u0, 0.9, 0), u0, atol=1e-10)


def test_closed_form_non_regular_uses_oracle(weak_line):
    u0 = np.random.default_rng(3).random(50)
    tm = wd.propagate(weak_line, wd.WaveConfig(t_max=20, c=1.0, u0=u0))
    for t in [0, 5, 19]:
        assert np.max(np.abs(wd.closed_form_trace(weak_line, u0, 1.0, t) - tm.values[:, t])) <= 1e-9


# ---------------------------------------------------------------------------
# boundedness (neutral stability)
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("c", [0.5, 1.0, 1.4])
def test_no_secular_growth(karate, c):
    tm = wd.propagate(karate, wd.WaveConfig(t_max=10_000, c=c), seed=1)
    assert np.max(np.abs(tm.values)) < 10.0 * np.max(np.abs(tm.values[:, 0]))
