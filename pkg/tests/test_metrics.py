import numpy as np
import pytest

from walkgossip import data, engine, metrics
from walkgossip.algorithms import GossipStepper, MultiWalkStepper
from walkgossip.graph import build_topology, metropolis_hastings


def _mw(V=4, n_walks=2, eta=0.1, seed=0, shift=0.0, noise=0.0, dim=3):
    topology = build_topology("complete", V)
    matrix = metropolis_hastings(topology)
    obj = data.make_synthetic("least_squares", V, 12, dim, hetero_shift=shift,
                              noise_std=noise, seed=seed)
    return MultiWalkStepper(topology, matrix, obj, n_walks=n_walks, eta=eta,
                            batch_size=6, x0=np.zeros(dim), seed=seed)


def test_consensus_of_identical_models():
    st = _mw()
    acct = engine.Accounting()
    rec = metrics.evaluate(st, acct)
    assert rec.spread == 0.0
    assert rec.t == 0 and rec.bits == 0
    assert rec.loss == pytest.approx(data.global_loss(st.objective, np.zeros(3)))


def test_single_walk_hub_equals_consensus():
    st = _mw(n_walks=1)
    rec = metrics.evaluate(st, engine.Accounting())
    assert rec.loss_hub == rec.loss


def test_evaluation_is_read_only():
    st = _mw(n_walks=3, shift=0.5, noise=0.2)
    for _ in range(50):
        st.step(0)
        st.step(1)
    before = (st.models.tobytes(), st.hub.tobytes(), st.hub_last,
              tuple(st.positions))
    metrics.evaluate(st, engine.Accounting(iterations=100, sim_time=3.0, bits=12))
    after = (st.models.tobytes(), st.hub.tobytes(), st.hub_last,
             tuple(st.positions))
    assert before == after


def test_gradnorm_vanishes_at_closed_form_optimum():
    st = _mw(shift=0.4, noise=0.3)
    obj = st.objective
    st.models[:] = obj.optimum
    rec = metrics.evaluate(st, engine.Accounting())
    assert rec.grad_norm <= 1e-8


def test_hand_built_two_node_record():
    topology = build_topology("complete", 2)
    matrix = metropolis_hastings(topology)
    A = np.array([[1.0, 0.0], [0.0, 1.0]])
    shards = (data.Shard(0, A, np.array([2.0, 0.0]), "least_squares"),
              data.Shard(1, A, np.array([0.0, 2.0]), "least_squares"))
    obj = data.Objective(shards=shards, task="least_squares", reg=0.0)
    st = GossipStepper(topology, matrix, obj, eta=0.1, batch_size=2,
                       x0=np.zeros(2), seed=0)
    st.models[0] = np.array([1.0, 0.0])
    st.models[1] = np.array([0.0, 1.0])
    rec = metrics.evaluate(st, engine.Accounting(iterations=5, sim_time=1.5, bits=40))
    # consensus [0.5, 0.5]; per-node residuals: ([-1.5, .5], [.5, -1.5])
    expect_loss = 0.5 * ((1.5**2 + 0.5**2) / 2 + (0.5**2 + 1.5**2) / 2) / 2
    assert rec.loss == pytest.approx(expect_loss, rel=1e-12)
    g0 = (np.array([0.5, 0.5]) - np.array([2.0, 0.0])) / 2
    g1 = (np.array([0.5, 0.5]) - np.array([0.0, 2.0])) / 2
    assert rec.grad_norm == pytest.approx(np.linalg.norm((g0 + g1) / 2), rel=1e-12)
    assert rec.spread == pytest.approx(np.sqrt(2.0), rel=1e-12)
    assert rec.tau_mean == 0.0 and rec.loss_hub is None


def _records(grads):
    return [metrics.RunRecord(t=i * 10, sim_time=float(i), bits=i * 8, loss=1.0,
                              grad_norm=g, spread=0.0) for i, g in enumerate(grads)]


def test_time_to_target_initial_crossing():
    recs = _records([0.5, 0.4])
    hit = metrics.time_to_target(recs, 0.9)
    assert hit.t == 0 and hit.bits == 0


def test_time_to_target_interior_crossing():
    recs = _records([1.0, 0.6, 0.3, 0.1])
    hit = metrics.time_to_target(recs, 0.5)
    assert hit.t == 20 and hit.sim_time == 2.0 and hit.bits == 16


def test_time_to_target_not_reached():
    recs = _records([1.0, 0.9])
    assert metrics.time_to_target(recs, 0.01) is None


def test_run_record_rejects_non_finite():
    with pytest.raises(ValueError):
        metrics.RunRecord(t=0, sim_time=np.nan, bits=0, loss=0.0, grad_norm=0.0,
                          spread=0.0)
