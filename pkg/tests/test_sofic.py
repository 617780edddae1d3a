import functools
import itertools
import math

import numpy as np
import pytest

from freegibbs.gibbs import SPIN, exact_gibbs
from freegibbs.markov import ising_spec, marginal
from freegibbs.shift import ising_potential, neighbor_boundary
from freegibbs.sofic import (
    SoficMap,
    act,
    act_all,
    empirical_pullback,
    good_fraction,
    induced_structure,
    is_good,
    pullback,
    random_sofic,
)
from freegibbs.words import (
    IDENTITY,
    FiniteWindow,
    GroupWord,
    ball,
    gen,
    multiply,
    window,
)


# --- independent oracle --------------------------------------------------

def compose(p, q):
    """Permutation composition p after q, as arrays."""
    return p[q]


def word_perm_oracle(sigma, g):
    """Re-derive the word permutation by left-to-right folding."""
    n = sigma.n
    out = np.arange(n)
    for x in g.letters:
        if x > 0:
            step = np.asarray(sigma.perms[x - 1])
        else:
            fwd = np.asarray(sigma.perms[-x - 1])
            step = np.empty(n, dtype=np.int64)
            step[fwd] = np.arange(n)
        out = compose(out, step)
    return out


def is_good_oracle(sigma, S, v):
    """Direct four-condition evaluation with its own word-action code."""
    words = S.words
    perms = {g: word_perm_oracle(sigma, g) for g in words}
    orbit = sorted({int(perms[g][v]) for g in words})
    # (1)
    if len({int(perms[g][v]) for g in words}) != len(words):
        return False
    # (2)
    for g1, g2 in itertools.product(words, repeat=2):
        p12 = word_perm_oracle(sigma, multiply(g1, g2))
        for w in orbit:
            if perms[g1][perms[g2][w]] != p12[w]:
                return False
    # (3) and (4)
    for g in words:
        pg = perms[g]
        pginv = word_perm_oracle(sigma, g.inverse())
        for w in orbit:
            if pginv[pg[w]] != w:
                return False
            t = int(np.flatnonzero(pg == w)[0])
            if t != pginv[w]:
                return False
    return True


# --- tests ----------------------------------------------------------------

def test_random_sofic_trivial_and_deterministic():
    s = random_sofic(3, 1, seed=0)
    assert all(p[0] == 0 for p in s.perms)
    a = random_sofic(2, 50, seed=123)
    b = random_sofic(2, 50, seed=123)
    assert all(np.array_equal(x, y) for x, y in zip(a.perms, b.perms))
    c = random_sofic(2, 50, seed=124)
    assert any(not np.array_equal(x, y) for x, y in zip(a.perms, c.perms))


def test_act_examples():
    rng = np.random.default_rng(8)
    sigma = SoficMap(5, (rng.permutation(5), rng.permutation(5)))
    v = 3
    assert act(sigma, IDENTITY, v) == v
    assert act(sigma, GroupWord.from_letters([1, -1]), v) == v
    g = GroupWord.from_letters([1, 2])
    assert act(sigma, g, v) == sigma.perms[0][sigma.perms[1][v]]
    for w in [g, g.inverse(), GroupWord.from_letters([2, 2, -1])]:
        assert np.array_equal(act_all(sigma, w), word_perm_oracle(sigma, w))


def test_act_is_bijection_per_word():
    sigma = random_sofic(2, 40, seed=5)
    for letters in [[1], [2, 1], [1, 1, -2], [-1, 2, -1, 2]]:
        img = act_all(sigma, GroupWord.from_letters(letters))
        assert np.array_equal(np.sort(img), np.arange(40))


def test_is_good_identity_window_always_true():
    sigma = random_sofic(2, 10, seed=1)
    assert all(is_good(sigma, window(IDENTITY), v) for v in range(10))


def test_is_good_matches_oracle_exhaustively():
    S = ball(2, 1)
    for seed in range(6):
        sigma = random_sofic(2, 10, seed=seed)
        for v in range(10):
            assert is_good(sigma, S, v) == is_good_oracle(sigma, S, v)


def test_is_good_monotone_in_window():
    Sbig = ball(2, 2)
    Ssmall = ball(2, 1)
    sigma = random_sofic(2, 60, seed=3)
    for v in range(60):
        if is_good(sigma, Sbig, v):
            assert is_good(sigma, Ssmall, v)


def left_regular_truncated(m, R):
    """Partial honest left action on ball(m, R), completed canonically."""
    verts = list(ball(m, R))
    index = {w: i for i, w in enumerate(verts)}
    n = len(verts)
    perms = []
    for i in range(1, m + 1):
        s = gen(i)
        target = [None] * n
        used = set()
        for w in verts:
            img = multiply(s, w)
            if img in index:
                target[index[w]] = index[img]
                used.add(index[img])
        free_targets = [j for j in range(n) if j not in used]
        it = iter(free_targets)
        for j in range(n):
            if target[j] is None:
                target[j] = next(it)
        perms.append(np.array(target))
    return SoficMap(n, tuple(perms)), index


def test_left_regular_interior_vertices_are_good():
    m, R, r = 2, 4, 1
    sigma, index = left_regular_truncated(m, R)
    S = ball(m, r)
    for w in ball(m, R - 2 * r):
        assert is_good(sigma, S, index[w])


def test_good_fraction_agrees_with_pointwise():
    S = ball(2, 1)
    sigma = random_sofic(2, 30, seed=9)
    frac = good_fraction(sigma, S)
    direct = sum(is_good(sigma, S, v) for v in range(30)) / 30
    assert frac == pytest.approx(direct)


def test_good_fraction_grows_with_n():
    S = ball(2, 2)
    med = []
    for n in [100, 1000]:
        fr = [good_fraction(random_sofic(2, n, seed=s), S) for s in range(10)]
        med.append(float(np.median(fr)))
    assert med[1] >= med[0]


def test_pullback_examples():
    sigma = random_sofic(2, 12, seed=2)
    tau = np.arange(12) % 2
    assert pullback(sigma, 5, window(IDENTITY), tau) == {IDENTITY: int(tau[5])}
    const = np.ones(12, dtype=int)
    out = pullback(sigma, 3, ball(2, 1), const)
    assert set(out.values()) == {1}


def test_pullback_hand_example():
    # n=6, m=1, explicit permutation
    perm = np.array([2, 0, 3, 5, 1, 4])
    sigma = SoficMap(6, (perm,))
    tau = np.array([0, 1, 1, 0, 1, 0])
    F = window(IDENTITY, gen(1), ~gen(1))
    out = pullback(sigma, 2, F, tau)
    inv = np.empty(6, dtype=int)
    inv[perm] = np.arange(6)
    assert out[IDENTITY] == tau[2]
    assert out[gen(1)] == tau[perm[2]]
    assert out[~gen(1)] == tau[inv[2]]


def test_induced_single_site_potential_is_product():
    from freegibbs.shift import ShiftPotential, WindowTerm

    table = np.array([0.2, -0.4])
    pot = ShiftPotential(2, SPIN, (WindowTerm(window(IDENTITY), table),))
    sigma = random_sofic(2, 6, seed=4)
    G = induced_structure(sigma, pot)
    assert len(G.terms) == 6
    assert all(t.arity == 1 for t in G.terms)
    got = exact_gibbs(G)
    p = np.exp(-table)
    p /= p.sum()
    expect = functools.reduce(np.multiply.outer, [p] * 6)
    assert np.allclose(got.array, expect, atol=1e-14)


def test_induced_n1_collapses_to_constant():
    beta = 0.7
    pot = ising_potential(beta, 2)
    sigma = SoficMap(1, (np.array([0]), np.array([0])))
    G = induced_structure(sigma, pot)
    # both generator terms collapse onto the single vertex with energy
    # -beta * x * x = -beta for either spin, i.e. a constant
    assert len(G.terms) == 1
    assert np.allclose(G.terms[0].table, -2 * beta)
    assert np.allclose(exact_gibbs(G).array, 0.5)


def transfer_matrix_cycle_logZ(beta, L):
    lam1 = math.exp(beta) + math.exp(-beta)
    lam2 = math.exp(beta) - math.exp(-beta)
    return math.log(lam1**L + lam2**L)


def test_induced_cycle_matches_transfer_matrix():
    beta = 0.55
    L = 8
    pot = ising_potential(beta, 1)
    shift = SoficMap(L, (np.roll(np.arange(L), -1),))
    G = induced_structure(shift, pot)
    assert sorted(t.support for t in G.terms) == sorted(
        tuple(sorted((v, (v + 1) % L))) for v in range(L)
    )
    table = exact_gibbs(G)
    logZ = transfer_matrix_cycle_logZ(beta, L)
    spins = np.array([-1.0, 1.0])
    for cfg in itertools.product(range(2), repeat=L):
        u = -beta * sum(
            spins[cfg[i]] * spins[cfg[(i + 1) % L]] for i in range(L)
        )
        assert table.array[cfg] == pytest.approx(math.exp(-u - logZ), rel=1e-10)


def test_empirical_pullback_examples():
    sigma = random_sofic(2, 9, seed=6)
    const = np.zeros(9, dtype=int)
    t = empirical_pullback(sigma, ball(2, 1), const, 2)
    assert t.array[(0,) * 5] == pytest.approx(1.0)

    two = SoficMap(2, (np.array([1, 0]), np.array([0, 1])))
    tau = np.array([0, 1])
    t = empirical_pullback(two, window(IDENTITY), tau, 2)
    assert np.allclose(t.array, [0.5, 0.5])


def test_empirical_pullback_approaches_tree_marginal():
    beta = 0.2
    spec = ising_spec(beta, 2)
    pot = ising_potential(beta, 2)
    W = ball(2, 1)
    target = marginal(spec, W)
    tvs = []
    for n in [300, 3000]:
        med = []
        for seed in range(5):
            sigma = random_sofic(2, n, seed=seed)
            G = induced_structure(sigma, pot)
            rng = np.random.default_rng(seed + 1000)
            from freegibbs.sampling import sample_structure

            tau = sample_structure(G, rng, sweeps=60)
            med.append(empirical_pullback(sigma, W, tau, 2).tv_distance(target))
        tvs.append(float(np.median(med)))
    assert tvs[1] < tvs[0]


def test_induced_boundary_commutes_at_good_vertices():
    m = 2
    pot = ising_potential(0.4, m)
    F = ball(m, 1)
    bndF = neighbor_boundary(F, m)
    S = ball(m, 3)
    sigma = random_sofic(m, 400, seed=21)
    G = induced_structure(sigma, pot)
    checked = 0
    for v in range(sigma.n):
        if checked >= 5:
            break
        if not is_good(sigma, S, v):
            continue
        checked += 1
        image = {act(sigma, g, v) for g in F}
        got = set(G.boundary(image))
        expect = {act(sigma, g, v) for g in bndF}
        assert got == expect
    assert checked == 5
