"""Acceptance criteria 1-9, one marked group per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

from __future__ import annotations

import itertools
import math
import random

import numpy as np
import pytest

from analoglab.blip import SignalF, f_partial, f_prime_exact, perturbed_signal, phi, step_Phi
from analoglab.growth import kleene_tree, leftmost_path_oracle, n_of_J, parity_family, run_trial, trial_step
from analoglab.harness import ExperimentConfig, load_config, run, verify_claim
from analoglab.harness.cli import main
from analoglab.precision import Cvq, quantize
from analoglab.resets import SyntheticSchedule, SyntheticVerifier
from analoglab.richardson import (
    B,
    CutoffIntegral,
    DecodingFamily,
    FDevice,
    K,
    bound_beta_from_upper_limit,
    nearest_natural,
)
from analoglab.spectra import build_T, classify_membership, measure, rows_needed
from test_growth import SAMPLE_TREES, random_finite_tree, reference_step, right_of
from test_harness import CONFIGS_DIR, NAMES, SMALL, write_config

BLIP_J = 8
BLIP_SCHEDULE = SyntheticSchedule(((1, 11), (2, 8), (4, 6), (6, 4), (7, 1)), filler_base=BLIP_J)

RICH_SCHEDULES = [
    SyntheticSchedule(((0, 3), (2, 6), (3, 1), (5, 9)), filler_base=8),
    SyntheticSchedule(((1, 10), (4, 2), (6, 7)), filler_base=8),
    SyntheticSchedule(((0, 0), (3, 5), (7, 8)), filler_base=8),
    SyntheticSchedule(((2, 4), (5, 10), (6, 1), (7, 3)), filler_base=8),
]


def c(n, title):
    return pytest.mark.criterion(n, title)


# --- 1 ----------------------------------------------------------------------


@c(1, "blip derivative exact at 2^-j; finite difference at step 2^-28 within 1e-6")
def test_blip_exactness():
    sig = SignalF(BLIP_SCHEDULE)
    h = 2.0**-28
    for j in range(BLIP_J):
        x = 2.0**-j
        exact = f_prime_exact(sig, x)
        assert exact == (4.0**-j if j in BLIP_SCHEDULE.members else 0.0)
        fd = (f_partial(sig, x + h).value - f_partial(sig, x - h).value) / (2 * h)
        assert abs(fd - exact) <= 1e-6


# --- 2 ----------------------------------------------------------------------


@c(2, "blip claim: every member flips, log2 threshold within nu+j +- 2; non-members always right")
def test_blip_claim_threshold():
    report = run(load_config(CONFIGS_DIR / "blip.toml"))
    assert len(report.config.precision_sweep) == 10
    ratios = [b / e for b, e in report.config.precision_sweep]
    assert all(r2 == 2 * r1 for r1, r2 in zip(ratios, ratios[1:]))
    verdict = verify_claim(report)
    assert verdict.holds
    for row in verdict.rows:
        if row.in_A:
            assert row.flips
            assert row.nu_j + row.j - 2 <= row.log2_threshold <= row.nu_j + row.j + 2
        else:
            assert row.always_correct


# --- 3 ----------------------------------------------------------------------


@c(3, "perturbation: sup |f - f_j| <= 2^-nu on 1e5 points; perturbed derivative 0 at 2^-j")
def test_perturbation_bound():
    sig = SignalF(BLIP_SCHEDULE)
    for j, nu in BLIP_SCHEDULE.pairs:
        other = perturbed_signal(sig, j)
        lo, hi = sig.blip_for(j).support
        # uniform over the domain plus a dense patch across the removed blip
        grid = np.concatenate([np.linspace(0.0, 2.0, 98_000), np.linspace(lo, hi, 2_000)])
        assert grid.size == 100_000
        gap = max(abs(f_partial(sig, float(x)).value - f_partial(other, float(x)).value) for x in grid)
        assert gap <= 2.0**-nu
        assert abs(f_prime_exact(other, 2.0**-j)) <= 1e-9
        h = 2.0**-28
        fd = (f_partial(other, 2.0**-j + h).value - f_partial(other, 2.0**-j - h).value) / (2 * h)
        assert abs(fd) <= 1e-9


# --- 4 ----------------------------------------------------------------------


@c(4, "surrogate F: five properties on exhaustive grids, k <= 2, step 0.05")
@pytest.mark.parametrize("k", [1, 2])
def test_F_properties(k):
    for sched in RICH_SCHEDULES:
        dev = FDevice(SyntheticVerifier.from_schedule(sched, arity=k))
        top = max(nu for _, nu in sched.pairs)
        G = math.ceil(math.sqrt(top) + 1)  # covers every witness x^2 = nu
        axis = np.arange(0, G + 1e-9, 0.05)
        grid = list(np.meshgrid(*([axis] * k), indexing="ij"))
        flipped = [-grid[0]] + grid[1:]
        for j in range(8):
            before = dev.verifier_calls
            values = dev.F(j, grid)
            # (5) every value went through the verifier
            assert dev.verifier_calls - before == values.size
            # (1) even, (2) nonnegative
            assert np.array_equal(dev.F(j, flipped), values)
            assert values.min() >= 0
            if j not in sched.members:
                # (3) with margin
                assert values.min() >= 1.5
                continue
            # (4) F <= 1 only next to a witness, where F vanishes at the integer-square point
            low = values <= 1
            # the grid may straddle the narrow basin, so also probe the witness itself
            witness = [math.sqrt(sched.waiting_time(j))] + [0.0] * (k - 1)
            assert abs(dev.F(j, witness)) <= 1e-12
            ints = np.stack([nearest_natural(g * g)[low] for g in grid], axis=-1)
            assert np.all(dev.verifier.evaluate_grid(j, ints) == 0)
            roots = [np.sqrt(ints[:, i].astype(float)) for i in range(k)]
            assert np.all(np.abs(dev.F(j, roots)) <= 1e-12)


# --- 5 ----------------------------------------------------------------------


@c(5, "zero regions are literal zeros; K ~ 0 off A; K > 10 tol on A with B >= 2 sqrt(nu)")
def test_zero_regions_and_K():
    fam = DecodingFamily(1)
    for sched in RICH_SCHEDULES:
        dev = FDevice(SyntheticVerifier.from_schedule(sched, arity=1))
        for j in range(8):
            nu = sched.waiting_time(j)
            if nu is None:
                assert K(dev, fam, CutoffIntegral(6.0), j) < 1e-9
                continue
            assert nu <= 10
            if nu >= 1:
                t = np.linspace(0, math.sqrt(max(nu - 1, 0)), 50_001)
                t = t[t * t < nu - 1]
                assert np.all(B(dev, fam, j, t) == 0.0)
            cut = CutoffIntegral(max(2 * math.sqrt(nu), 1.0))
            assert K(dev, fam, cut, j) > 10 * cut.tol


# --- 6 ----------------------------------------------------------------------


@c(6, "beta bound from the upper limit covers every detected member over 20 (schedule, B) pairs")
def test_beta_bound_soundness():
    fam = DecodingFamily(1)
    pairs = list(itertools.product(RICH_SCHEDULES, (1.0, 1.5, 2.0, 2.5, 3.5)))
    assert len(pairs) == 20
    detections = 0
    for sched, upper in pairs:
        dev = FDevice(SyntheticVerifier.from_schedule(sched, arity=1))
        cut = CutoffIntegral(upper)
        for j in range(8):
            if K(dev, fam, cut, j) > 10 * cut.tol:
                nu = sched.waiting_time(j)
                assert nu is not None
                assert bound_beta_from_upper_limit(upper) >= nu
                detections += 1
    assert detections > 0


# --- 7 ----------------------------------------------------------------------


@c(7, "spectra: T flips within an octave of the band width; rows needed = beta(J) + 1")
@pytest.mark.parametrize("nu", [5, 8, 11, 14, 17, 20])
def test_T_flip(nu):
    j = 1
    sched = SyntheticSchedule(((j, nu),), filler_base=4)
    op = build_T(sched, 4, budget=nu + 1)
    width = 2 * 2.0**-nu
    # quarter-octave sweep of eps, coarsest last
    eps = [2.0 ** (-q / 4) for q in range(4 * (nu + 6), 4 * 2, -1)]
    answers = [classify_membership(measure(op, e), j, "T") for e in eps]
    first_no = answers.index(False)
    assert all(answers[:first_no]) and not any(answers[first_no:])
    assert abs(math.log2(eps[first_no]) - math.log2(width)) <= 1


@c(7, "spectra: T flips within an octave of the band width; rows needed = beta(J) + 1")
def test_rows_needed():
    rng = random.Random(7)
    for _ in range(10):
        J = rng.randint(3, 10)
        members = rng.sample(range(J), rng.randint(1, J))
        nus = rng.sample(range(21), len(members))
        sched = SyntheticSchedule(tuple(zip(members, nus)), filler_base=J)
        assert rows_needed(sched, J, "S") == sched.beta(J) + 1


# --- 8 ----------------------------------------------------------------------


@c(8, "growth: never right of the leftmost path, n_J resolves for J <= 12, rules match reference")
@pytest.mark.parametrize("name", sorted(SAMPLE_TREES))
def test_growth_sample_trees(name):
    tree, lam = SAMPLE_TREES[name]
    trace = run_trial(tree, 20000 if name == "spurs" else 2000)
    path = lam(max(len(u) for u in trace.steps) + 1)
    assert not any(right_of(u, path) for u in trace.steps)
    for J in range(13):
        prefix = leftmost_path_oracle(tree, J, 2 * J + 8)
        assert prefix == lam(J)
        assert n_of_J(trace, prefix) is not None


@c(8, "growth: never right of the leftmost path, n_J resolves for J <= 12, rules match reference")
def test_growth_kleene_tree():
    budget = 24
    tree = kleene_tree(budget, parity_family())
    constrained = max(cn.position for cn in tree.constraints)
    lam = leftmost_path_oracle(tree, constrained + 1, budget + 2)
    trace = run_trial(tree, 12000)
    path = lam + "0" * max(len(u) for u in trace.steps)
    assert not any(right_of(u, path) for u in trace.steps)
    assert all(n_of_J(trace, path[:J]) is not None for J in range(13))


@c(8, "growth: never right of the leftmost path, n_J resolves for J <= 12, rules match reference")
def test_trial_step_exhaustive():
    rng = random.Random(8)
    trees = [t for t, _ in SAMPLE_TREES.values()] + [kleene_tree(24, parity_family())]
    trees += [random_finite_tree(rng, depth=10, p=q) for q in (0.6, 0.8, 0.95)]
    for tree in trees:
        for n in range(11):
            for bits in itertools.product("01", repeat=n):
                u = "".join(bits)
                if u in tree:
                    assert trial_step(tree, u) == reference_step(tree, u)


# --- 9 ----------------------------------------------------------------------


@c(9, "determinism: byte-identical reruns; 1e4 seeded spot checks")
@pytest.mark.parametrize("name", NAMES)
def test_reruns_are_byte_identical(tmp_path, name, capsys):
    cfg = write_config(tmp_path, name, SMALL[name])
    out = tmp_path / "out"
    snapshots = []
    for _ in range(2):
        assert main(["--config", str(cfg), "--out", str(out), "--seed", "11"]) == 0
        snapshots.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert snapshots[0] == snapshots[1]
    capsys.readouterr()


@c(9, "determinism: byte-identical reruns; 1e4 seeded spot checks")
def test_seeded_spot_checks():
    rng = np.random.default_rng(20240)
    n = 10_000
    # quantization: multiples of eps, within eps/2 unless clipped, idempotent
    for eps, v in zip(2.0 ** rng.uniform(-30, 0, n), rng.uniform(-3, 3, n)):
        cvq = Cvq(1.0, float(eps))
        r = quantize(cvq, float(v))
        assert quantize(cvq, r.quantized_value).quantized_value == r.quantized_value
        assert r.clipped or abs(r.quantized_value - v) <= eps / 2 * (1 + 1e-9)
    # bump: even, in [0, 1]
    for x in rng.uniform(-1.5, 1.5, n):
        assert phi(float(x)) == phi(float(-x)) and 0 <= phi(float(x)) <= 1
    # step: monotone along sorted points
    sig = SignalF(BLIP_SCHEDULE)
    xs = np.sort(np.concatenate([rng.uniform(0, 2, n // 2), rng.uniform(0.49, 0.51, n // 2)]))
    values = [f_partial(sig, float(x)).value for x in xs]
    assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))
    assert all(0 <= step_Phi(b, 2.0) <= 2.0**-b.n for b in sig.blips)
    # surrogate F: even and nonnegative on random points
    dev = FDevice(SyntheticVerifier.from_schedule(RICH_SCHEDULES[0], arity=2))
    pts = rng.uniform(-4, 4, size=(2, n))
    for j in range(8):
        f = dev.F(j, list(pts))
        assert np.all(f >= 0)
        assert np.array_equal(f, dev.F(j, [-pts[0], pts[1]]))
    # explorer: random strings in a random tree against the reference
    prng = random.Random(99)
    tree = random_finite_tree(prng, depth=14, p=0.85)
    nodes = sorted(tree.nodes(14))
    for u in (prng.choice(nodes) for _ in range(n)):
        assert trial_step(tree, u) == reference_step(tree, u)


@c(9, "determinism: byte-identical reruns; 1e4 seeded spot checks")
def test_in_memory_runs_match():
    config = ExperimentConfig("spectra-T", J=4, schedule=((1, 7), (3, 9)))
    assert run(config) == run(config)
