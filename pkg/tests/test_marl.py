import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toys import perturb_targets, toy_batch, toy_episode, toy_hp, toy_learner
from xrmarl.env import RINGS, ScenarioConfig
from xrmarl.marl import (LOG_HEADER, AgentNet, CodecActionGrid, DisabledActionTable,
                         EpisodeReplay, Hyperparams, MatrixGame, MixerNet, XrMarlEnv, agent_q,
                         buffer_range, collate, episodes_to_fraction, epsilon_schedule,
                         hard_update, load_checkpoint, mix, optimistic_weight, save_checkpoint,
                         select_action, train, unroll_agent, update_disabled, weighted_td_loss,
                         write_train_log)
from xrmarl.nn import Tensor, backward, check_gradients, dense_forward, gru_step


# -- action grid and filter -----------------------------------------------------

def test_grid_endpoints_and_order():
    g = CodecActionGrid(0.5, 10.0, 8)
    r = g.rates
    assert r.size == 8 and r[0] == 0.5 and r[-1] == 10.0
    assert np.all(np.diff(r) > 0)
    assert g.rate(3) == pytest.approx(0.5 + 3 * 9.5 / 7)
    with pytest.raises(IndexError):
        g.rate(8)
    with pytest.raises(ValueError):
        CodecActionGrid(10, 10, 8)


@given(st.floats(0.1, 50), st.floats(0.1, 50), st.integers(2, 20))
def test_grid_property(a, b, k):
    if a == b:
        return
    lo, hi = sorted((a, b))
    g = CodecActionGrid(lo, hi, k)
    assert g.rates.size == k
    assert math.isclose(g.rate(0), lo) and math.isclose(g.rate(k - 1), hi, rel_tol=1e-12)


@pytest.mark.parametrize("b, idx", [(0.0, 0), (0.959, 0), (0.96, 1), (0.9699, 1), (0.97, 2),
                                    (0.985, 3), (0.99, 4), (1.0, 4)])
def test_buffer_ranges(b, idx):
    assert buffer_range(b) == idx


def test_buffer_range_rejects_out_of_range():
    with pytest.raises(ValueError):
        buffer_range(1.1)
    with pytest.raises(ValueError):
        buffer_range(-0.1)


def test_table_examples():
    t = DisabledActionTable(3, 8)
    update_disabled(t, 0, 2, 3)
    assert t.disabled(0, 2) == {3}
    update_disabled(t, 0, 2, 3)
    assert t.disabled(0, 2) == {3}
    for a in range(7):
        t.add(1, 4, a)
    assert len(t.disabled(1, 4)) == 7
    assert not t.add(1, 4, 7)
    assert t.disabled(1, 4) == set(range(7))
    assert t.disabled(2, 0) == frozenset()


@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 4), st.integers(0, 7)), max_size=200))
def test_table_monotone_and_capped(ops):
    t = DisabledActionTable(3, 8)
    prev = t.as_array()
    for agent, r, a in ops:
        t.add(agent, r, a)
        cur = t.as_array()
        assert np.all(cur >= prev)
        assert t.sizes().max() <= 7
        prev = cur


def test_table_load_validates():
    t = DisabledActionTable(1, 3)
    with pytest.raises(ValueError):
        t.load(np.ones((1, 5, 3), bool))
    with pytest.raises(ValueError):
        t.load(np.zeros((2, 5, 3), bool))


@pytest.mark.parametrize("step, eps", [(0, 1.0), (15000, 0.05), (7500, 0.525), (10**7, 0.05)])
def test_epsilon_examples(step, eps):
    assert epsilon_schedule(step) == pytest.approx(eps, abs=1e-12)


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_epsilon_bounded_and_monotone(a, b):
    lo, hi = sorted((a, b))
    assert 0.05 <= epsilon_schedule(hi) <= epsilon_schedule(lo) <= 1.0


def test_epsilon_rejects_negative():
    with pytest.raises(ValueError):
        epsilon_schedule(-1)


def test_select_action_examples():
    rng = np.random.default_rng(0)
    q = np.array([0.1, 0.9, 0.3])
    assert select_action(q, 0.0, np.ones(3, bool), rng) == 1
    assert select_action(q, 0.0, np.array([True, False, True]), rng) == 2
    with pytest.raises(RuntimeError):
        select_action(q, 0.5, np.zeros(3, bool), rng)


def test_select_action_uniform_over_enabled():
    rng = np.random.default_rng(0)
    enabled = np.array([True, False, True, True, False, True, True, True])
    n = 10_000
    counts = np.bincount([select_action(np.zeros(8), 1.0, enabled, rng) for _ in range(n)],
                         minlength=8)
    assert np.all(counts[~enabled] == 0)
    p = 1 / enabled.sum()
    sigma = math.sqrt(n * p * (1 - p))
    assert np.all(np.abs(counts[enabled] - n * p) <= 3 * sigma)


@given(st.integers(0, 2**31 - 1), st.floats(0, 1),
       st.lists(st.booleans(), min_size=8, max_size=8).filter(any))
@settings(max_examples=80)
def test_select_action_never_disabled(seed, eps, enabled):
    rng = np.random.default_rng(seed)
    enabled = np.array(enabled)
    q = rng.standard_normal(8)
    for _ in range(5):
        assert enabled[select_action(q, eps, enabled, rng)]


# -- networks -------------------------------------------------------------------

def _zero(module):
    for p in module.parameters():
        p.data = np.zeros_like(p.data)


def test_zero_agent_gives_zero_q():
    net = AgentNet(5, 8, 16, seed=0)
    _zero(net)
    q, h = agent_q(net, np.ones(5), np.eye(8)[2], np.zeros(16))
    assert np.all(q.data == 0) and np.all(h.data == 0)


def test_agent_q_deterministic_and_validated(rng):
    net = AgentNet(5, 8, 16, seed=1)
    obs, last, h = rng.uniform(size=5), np.eye(8)[1], rng.standard_normal(16)
    a = agent_q(net, obs, last, h)
    b = agent_q(net, obs, last, h)
    assert np.array_equal(a[0].data, b[0].data) and np.array_equal(a[1].data, b[1].data)
    with pytest.raises(ValueError):
        agent_q(net, np.ones(4), last, h)
    with pytest.raises(ValueError):
        agent_q(net, obs, np.ones(7), h)


def test_agent_unroll_matches_composition(rng):
    net = AgentNet(5, 4, 8, seed=2)
    obs = rng.uniform(size=(3, 5))
    acts = [None, 2, 0]
    h = np.zeros(8)
    for t in range(3):
        last = np.zeros(4) if acts[t] is None else np.eye(4)[acts[t]]
        x = dense_forward(net.fc_in, np.concatenate([obs[t], last]))
        h_ref = gru_step(net.gru, x, h)
        q_ref = dense_forward(net.head, h_ref)
        q, h_new = agent_q(net, obs[t], last, h)
        assert np.allclose(q.data, q_ref.data, rtol=0, atol=1e-14)
        h = h_new.data


def test_unroll_agent_matches_stepwise(rng):
    net = AgentNet(5, 4, 8, seed=3)
    obs = rng.uniform(size=(2, 4, 5))
    last = np.zeros((2, 4, 4))
    last[:, 1:] = np.eye(4)[rng.integers(0, 4, (2, 3))]
    q_seq = unroll_agent(net, obs, last).data
    for b in range(2):
        h = np.zeros(8)
        for t in range(4):
            q, h = agent_q(net, obs[b, t], last[b, t], h)
            h = h.data
            assert np.allclose(q_seq[b, t], q.data, atol=1e-13)


def test_constant_mixer():
    m = MixerNet(3, 7, 4, 5, seed=0)
    _zero(m)
    m.b2_out.bias.data = np.array([2.5])
    out = mix(np.array([1.0, -3.0, 7.0]), np.ones(7), m)
    assert out.item() == 2.5


def test_one_agent_mixer_affine():
    m = MixerNet(1, 2, 1, 3, seed=0)
    _zero(m)
    m.w1_out.bias.data = np.array([-1.5])   # W1 = |-1.5|
    m.b1.bias.data = np.array([10.0])       # keep elu on its linear branch
    m.w2_out.bias.data = np.array([-2.0])   # w2 = 2
    m.b2_out.bias.data = np.array([0.5])
    qs = np.array([-3.0, 0.0, 4.0])
    out = np.array([mix(np.array([q]), np.zeros(2), m).item() for q in qs])
    assert np.allclose(out, 2.0 * (1.5 * qs + 10.0) + 0.5)


def test_mixing_weights_non_negative(rng):
    m = MixerNet(3, 20, seed=4)
    w1, _, w2, _ = m.mixing_weights(rng.standard_normal((50, 20)) * 5)
    assert np.all(w1.data >= 0) and np.all(w2.data >= 0)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_mixer_monotone_probe(seed):
    rng = np.random.default_rng(seed)
    m = MixerNet(3, 20, seed=seed % 1000)
    s = rng.standard_normal(20) * 3
    q = rng.standard_normal(3) * 5
    base = mix(q, s, m).item()
    for a in range(3):
        assert mix(q + 1e-3 * np.eye(3)[a], s, m).item() - base >= -1e-9
        assert mix(q + np.eye(3)[a], s, m).item() >= base


def test_mixer_batched_matches_single(rng):
    m = MixerNet(3, 7, 4, 5, seed=5)
    q = rng.standard_normal((2, 3, 3))
    s = rng.standard_normal((2, 3, 7))
    out = mix(q, s, m).data
    for i in range(2):
        for j in range(3):
            assert out[i, j] == pytest.approx(mix(q[i, j], s[i, j], m).item(), abs=1e-13)


# -- weighting, targets, loss ---------------------------------------------------

def test_optimistic_weight_table():
    hp = Hyperparams()
    assert optimistic_weight(2.0, 3.0, hp) == 1.0
    assert optimistic_weight(3.0, 2.0, hp) == 0.1
    assert optimistic_weight(2.0, 2.0, hp) == 0.1
    q = Hyperparams(mode="qmix")
    assert optimistic_weight(3.0, 2.0, q) == 1.0
    w = optimistic_weight(np.array([1.0, 2.0, 3.0]), np.array([2.0, 2.0, 2.0]), hp)
    assert list(w) == [1.0, 0.1, 0.1]


@given(st.floats(-100, 100), st.floats(-100, 100), st.floats(0.01, 1.0))
def test_optimistic_weight_range(q, y, alpha):
    assert optimistic_weight(q, y, Hyperparams(alpha=alpha)) in (1.0, alpha)
    assert optimistic_weight(q, y, Hyperparams(mode="qmix", alpha=alpha)) == 1.0


def test_hyperparams_validation():
    for bad in (dict(mode="vdn"), dict(gamma=1.0), dict(alpha=0.0), dict(eps_end=2.0),
                dict(buffer_size=10, batch_size=64), dict(n_levels=1)):
        with pytest.raises(ValueError):
            Hyperparams(**bad)


def test_weighted_loss_examples():
    q = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    assert weighted_td_loss(q, np.array([1.0, 2.0]), np.ones(2), np.ones(2)).item() == 0.0
    q1 = Tensor(np.array([0.0]), requires_grad=True)
    assert weighted_td_loss(q1, np.array([2.0]), np.array([0.1]), np.ones(1)).item() == \
        pytest.approx(0.4)
    # padded entry ignored in both numerator and count
    q2 = Tensor(np.array([0.0, 5.0]), requires_grad=True)
    assert weighted_td_loss(q2, np.array([2.0, -9.0]), np.array([0.1, 1.0]),
                            np.array([1.0, 0.0])).item() == pytest.approx(0.4)
    with pytest.raises(ValueError):
        weighted_td_loss(q1, np.zeros(1), np.ones(1), np.zeros(1))


def _hand_learner():
    """Two agents, two actions, constant Q-heads and a fixed one-unit mixer."""
    learner = toy_learner(n_agents=2, obs_dim=1, state_dim=1, n_levels=2, mixer_embed=1,
                          gamma=0.5)

    def set_heads(agents, consts):
        for net, c in zip(agents, consts):
            net.head.weight.data = np.zeros_like(net.head.weight.data)
            net.head.bias.data = np.array(c, float)

    def set_mixer(m, v, u, b):
        for p in m.parameters():
            p.data = np.zeros_like(p.data)
        m.w1_out.bias.data = np.array(v, float)
        m.w2_out.bias.data = np.array([u], float)
        m.b2_out.bias.data = np.array([b], float)

    set_heads(learner.agents, [(0.5, 2.0), (1.0, -1.0)])
    set_heads(learner.target_agents, [(3.0, 1.0), (0.2, 0.7)])
    set_mixer(learner.mixer, (1.0, 1.0), 1.0, 0.0)
    set_mixer(learner.target_mixer, (1.0, -2.0), -0.5, 0.1)
    return learner


def _hand_batch(terminal_last):
    from xrmarl.marl import Episode
    ep = Episode(obs=np.ones((3, 2, 1)), state=np.ones((3, 1)),
                 actions=np.array([[0, 1], [1, 0]]), rewards=np.array([0.25, -1.0]),
                 terminal=np.array([False, terminal_last]), ranges=np.array([0, 4, 4]))
    return collate([ep], 2)


def test_td_target_hand_computation():
    learner = _hand_learner()
    # eval argmax: agent0 -> 1, agent1 -> 0; target scores 1.0 and 0.2
    # target Q_tot = 0.5 * elu(1*1.0 + 2*0.2) + 0.1 = 0.8
    parts = learner.loss(_hand_batch(terminal_last=True))
    assert parts.targets[0] == pytest.approx([0.25 + 0.5 * 0.8, -1.0])
    parts = learner.loss(_hand_batch(terminal_last=False))
    assert parts.targets[0] == pytest.approx([0.25 + 0.5 * 0.8, -1.0 + 0.5 * 0.8])


def test_td_target_respects_disabled_actions():
    learner = _hand_learner()
    disabled = np.zeros((2, 5, 2), bool)
    disabled[0, 4, 1] = True  # agent0 must bootstrap with action 0 in range 4
    parts = learner.loss(_hand_batch(terminal_last=True), disabled)
    # target values 3.0 and 0.2 -> 0.5 * elu(3.4) + 0.1 = 1.8
    assert parts.targets[0, 0] == pytest.approx(0.25 + 0.5 * 1.8)


def test_td_target_terminal_and_gamma_zero(rng):
    batch = toy_batch(rng)
    learner = toy_learner(gamma=0.0)
    y = learner.loss(batch).targets
    assert np.array_equal(y, batch.rewards)
    learner = toy_learner()
    y = learner.loss(batch).targets
    term = batch.terminal & (batch.mask > 0)
    assert np.array_equal(y[term], batch.rewards[term])


def test_loss_gradient_matches_finite_differences(rng):
    for draw in range(3):
        learner = toy_learner(seed=draw)
        perturb_targets(learner, rng)
        batch = toy_batch(rng, lengths=(2, 1))
        report = check_gradients(lambda: learner.loss(batch).loss, learner.parameters())
        assert report.passed, report


def test_padded_steps_have_no_influence(rng):
    learner = toy_learner(seed=7)
    batch = toy_batch(rng, lengths=(4, 1, 2))
    loss_a = learner.loss(batch).loss
    grads_a = backward(loss_a, learner.parameters())
    pad = batch.mask == 0
    batch.rewards[pad] = 123.0
    batch.actions[pad] = 3
    pad_obs = np.concatenate([np.zeros((3, 1), bool), pad], axis=1)
    # obs after the final real s' are padding too
    for i, t in enumerate((4, 1, 2)):
        pad_obs[i, t] = False
        pad_obs[i, t + 1:] = True
    batch.obs[pad_obs] = 55.0
    batch.state[pad_obs] = -9.0
    loss_b = learner.loss(batch).loss
    grads_b = backward(loss_b, learner.parameters())
    assert loss_a.item() == loss_b.item()
    for a, b in zip(grads_a, grads_b):
        assert np.array_equal(a, b)


def test_qmix_equals_oqmix_with_unit_alpha(rng):
    batch = toy_batch(rng)
    a = toy_learner(seed=3, mode="qmix")
    b = toy_learner(seed=3, mode="oqmix", alpha=1.0)
    for _ in range(5):
        assert a.train_step(batch) == b.train_step(batch)
    for p, q in zip(a.parameters(), b.parameters()):
        assert np.array_equal(p.data, q.data)


def test_oqmix_differs_from_qmix_only_by_weights(rng):
    batch = toy_batch(rng)
    a = toy_learner(seed=3, mode="qmix").loss(batch)
    b = toy_learner(seed=3, mode="oqmix").loss(batch)
    assert np.array_equal(a.q_tot, b.q_tot) and np.array_equal(a.targets, b.targets)
    assert set(np.unique(b.weights[batch.mask > 0])) <= {0.1, 1.0}
    assert np.all(a.weights[batch.mask > 0] == 1.0)


# -- training step ---------------------------------------------------------------

def test_hard_update_copies_and_is_idempotent(rng):
    learner = toy_learner(target_update_period=2)
    perturb_targets(learner, rng)
    learner.update_targets()
    snap = [p.data.copy() for t in learner.target_agents for p in t.parameters()]
    learner.update_targets()
    again = [p.data.copy() for t in learner.target_agents for p in t.parameters()]
    assert all(np.array_equal(a, b) for a, b in zip(snap, again))
    for tgt, src in zip(learner.target_agents, learner.agents):
        for p, q in zip(tgt.parameters(), src.parameters()):
            assert np.array_equal(p.data, q.data)


def test_periodic_hard_update(rng):
    learner = toy_learner(target_update_period=3)
    batch = toy_batch(rng)
    learner.train_step(batch)
    learner.train_step(batch)
    mix_src = learner.mixer.parameters()[0].data
    assert not np.array_equal(learner.target_mixer.parameters()[0].data, mix_src)
    learner.train_step(batch)
    for p, q in zip(learner.target_mixer.parameters(), learner.mixer.parameters()):
        assert np.array_equal(p.data, q.data)


def test_overfit_single_episode(rng):
    learner = toy_learner(seed=1, lr=5e-3, target_update_period=10**6)
    batch = collate([toy_episode(rng, 4)], 4)
    losses = [learner.train_step(batch) for _ in range(50)]
    assert losses[-1] < 0.2 * losses[0]


def test_train_step_skips_non_finite(rng, caplog):
    learner = toy_learner()
    batch = toy_batch(rng)
    batch.rewards[0, 0] = np.nan
    before = [p.data.copy() for p in learner.parameters()]
    assert np.isnan(learner.train_step(batch))
    assert learner.skipped_steps == 1 and learner.train_steps == 0
    assert all(np.array_equal(a, p.data) for a, p in zip(before, learner.parameters()))


# -- replay ----------------------------------------------------------------------

def test_replay_evicts_oldest(rng):
    rep = EpisodeReplay(3)
    eps = [toy_episode(rng, 1) for _ in range(5)]
    for e in eps:
        rep.add(e)
    assert len(rep) == 3 and rep.total_added == 5
    assert rep.episodes()[0] is eps[2]
    assert rep.can_sample(2) and not rep.can_sample(3)


def test_replay_sampling_uniform():
    rng = np.random.default_rng(0)
    rep = EpisodeReplay(10)
    for i in range(10):
        e = toy_episode(rng, 1)
        e.rewards[:] = i
        rep.add(e)
    counts = np.zeros(10)
    for _ in range(2000):
        b = rep.sample(3, rng, 4)
        for r in b.rewards[:, 0]:
            counts[int(r)] += 1
    expected = 2000 * 3 / 10
    assert np.all(np.abs(counts - expected) <= 4 * math.sqrt(expected))


def test_collate_padding(rng):
    b = toy_batch(rng, lengths=(3, 1))
    assert b.actions.shape == (2, 3, 3) and b.obs.shape == (2, 4, 3, 5)
    assert b.mask.tolist() == [[1, 1, 1], [1, 0, 0]]
    assert np.all(b.last_onehot[:, 0] == 0)
    assert np.all(b.last_onehot[1, 2:] == 0)
    assert np.array_equal(b.last_onehot[0, 1].argmax(-1), b.actions[0, 0])


# -- runs ------------------------------------------------------------------------

def test_matrix_game_optimum_enumeration():
    game = MatrixGame()
    assert game.optimum() == (0, 0)
    best = max(((i, j) for i in range(3) for j in range(3)), key=lambda ij: game.payoff[ij])
    assert best == (0, 0)


def test_short_xr_training_run_audits_mask(tmp_path):
    hp = Hyperparams(batch_size=4, buffer_size=50, rnn_hidden=16, mixer_embed=8, hyper_hidden=16)
    env = XrMarlEnv(ScenarioConfig(ring=RINGS[2], seed=0), hp.n_levels, seed=0)
    snapshots = []
    res = train(env, hp, seed=0, episodes=12,
                on_episode=lambda e, ro: snapshots.append(res_table_sizes(env, ro)))
    assert res.audit.executions > 0
    assert res.audit.disabled_executions == 0
    assert not res.audit.table_shrank
    assert res.learner.train_steps == 12 - 4
    assert res.env_steps == sum(len(r) for r in snapshots)
    write_train_log(res.logs, tmp_path / "log.csv")
    lines = (tmp_path / "log.csv").read_text().splitlines()
    assert lines[0] == ",".join(LOG_HEADER)
    assert len(lines) == 13


def res_table_sizes(env, ro):
    return ro.transitions


def test_training_is_deterministic():
    hp = Hyperparams(batch_size=2, buffer_size=10, rnn_hidden=8, mixer_embed=4, hyper_hidden=8)

    def run():
        env = XrMarlEnv(ScenarioConfig(seed=3), hp.n_levels, seed=3)
        return train(env, hp, seed=5, episodes=5)

    a, b = run(), run()
    assert [e.row() for e in a.logs] == [e.row() for e in b.logs]


def test_checkpoint_roundtrip(tmp_path, rng):
    learner = toy_learner(seed=2)
    batch = toy_batch(rng)
    learner.train_step(batch)
    table = DisabledActionTable(3, 4)
    table.add(1, 4, 2)
    path = save_checkpoint(tmp_path / "ck.npz", learner, table, {"episodes": 7})
    loaded, t2, meta = load_checkpoint(path)
    assert meta["episodes"] == 7 and meta["train_steps"] == 1
    assert np.array_equal(t2.as_array(), table.as_array())
    for p, q in zip(learner.parameters(), loaded.parameters()):
        assert np.array_equal(p.data, q.data)
    assert learner.train_step(batch) == loaded.train_step(batch)


def test_episodes_to_fraction():
    curve = np.concatenate([np.zeros(50), np.linspace(0, 10, 100), np.full(100, 10.0)])
    k = episodes_to_fraction(curve, 0.8, window=1, tail=50)
    assert curve[k] >= 8.0 and curve[k - 1] < 8.0
    flat = np.full(100, -3.0)
    assert episodes_to_fraction(flat, window=10, tail=20) == 9
