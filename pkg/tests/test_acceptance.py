"""Acceptance criteria at their stated tolerances.

Each test records a PASS/FAIL line through the ``criterion`` fixture; the
lines are printed at the end of the pytest run. Criteria that cannot hold
as stated are marked ``xfail(strict=True)`` with the reason; their
assertions are unchanged.
"""

import os
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from scipy.cluster.vq import kmeans2
from scipy.optimize import linear_sum_assignment

from oracles import brute_force_mdi, loop_cumulants, loop_standardize
from tjade import ica
from tjade.cli import bundled_config
from tjade.io import read_semeion
from tjade.metrics import kronecker_gain, mdi
from tjade.simlab import asv_profile, asv_table, draw_sources, haar_orthogonal, monte_carlo_variances
from tjade.simlab.experiment import ExperimentConfig, run_experiment, summary_lookup
from tjade.tensor import sample_multi_mode_product

SEED = 2016
SEMEION = Path(os.environ.get("SEMEION_PATH", Path(__file__).parent / "data" / "semeion.data"))


def grid_samples(count, n, mixing=True):
    """``count`` independent 3x4 grid samples with per-sample Haar mixing."""
    out = []
    for child in np.random.SeedSequence(SEED).spawn(count):
        rng = np.random.default_rng(child)
        Z = draw_sources("grid3x4", n, rng)
        mixers = [haar_orthogonal(p, rng) for p in Z.shape[1:]] if mixing else None
        out.append((sample_multi_mode_product(Z, mixers) if mixing else Z, mixers))
    return out


def test_criterion_01_cumulant_oracle(criterion):
    rng = np.random.default_rng(SEED)
    shapes = [(2, 2), (3, 2), (2, 3), (3, 3), (2, 2, 2), (3, 3, 2)]
    worst = 0.0
    for k in range(50):
        dims = shapes[k % len(shapes)]
        n = int(rng.integers(4, 9))
        X = rng.standard_normal((n, *dims)) * rng.uniform(0.5, 2.0, dims)
        fast, _ = ica.standardize(ica.center(X)[0])
        slow = loop_standardize(X)
        for m in range(1, len(dims) + 1):
            for c in (1, 2):
                ref = loop_cumulants(slow, m, c)
                cs = ica.cumulant_set(fast, m, c)
                for pair, C in zip(cs.pairs, cs.matrices):
                    worst = max(worst, float(np.abs(C - ref[pair]).max()))
    passed = worst < 1e-12
    criterion(1, "cumulants equal nested-loop oracle", passed, f"max abs diff {worst:.2e} (< 1e-12)")
    assert passed


@pytest.mark.xfail(
    strict=True,
    reason="sqrt(n)-scaled sd of the diagonal cumulant entries is 47-173 for this grid "
    "(eighth moments of chi^2_1.2 and InverseGaussian), so a 5/sqrt(n) bound is far inside the noise",
)
def test_criterion_02_cumulant_structure(criterion):
    n = 100_000
    Z = draw_sources("grid3x4", n, np.random.default_rng(SEED))
    Xst, _ = ica.standardize(ica.center(Z)[0])
    profile = asv_profile("grid3x4")
    worst = 0.0
    for m in (1, 2):
        kappa = profile.mode(m).kappa
        for c in (1, 2):
            cs = ica.cumulant_set(Xst, m, c)
            for (i, j), C in zip(cs.pairs, cs.matrices):
                target = np.zeros_like(C)
                if i == j:
                    target[i, i] = kappa[i]
                worst = max(worst, float(np.abs(C - target).max()))
    bound = 5 / np.sqrt(n)
    passed = worst < bound
    criterion(
        2, "cumulant matrices diagonal under identity mixing", passed,
        f"max deviation {worst:.4f} vs bound {bound:.4f} (sqrt(n) x dev = {worst * np.sqrt(n):.1f})",
    )  # fmt: skip
    assert passed


def test_criterion_03_mdi_brute_force(criterion):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for k in range(1000):
        p = 2 + k % 5
        G = rng.standard_normal((p, p))
        worst = max(worst, abs(mdi(G) - brute_force_mdi(G)))
    zero = True
    for p in range(2, 7):
        P = np.eye(p)[rng.permutation(p)] * rng.choice([-1.0, 1.0], p) * rng.uniform(0.1, 10, p)
        zero = zero and mdi(P) == 0.0
    passed = worst <= 1e-12 and zero
    criterion(3, "MDI equals brute force", passed, f"max abs diff {worst:.2e}; scaled permutations exactly 0: {zero}")
    assert passed


@pytest.fixture(scope="module")
def grid_study():
    config = replace(
        ExperimentConfig.load(bundled_config("grid3x4.json")), ns=(1000, 4000, 8000), reps=100, seed=SEED
    )
    return summary_lookup(run_experiment(config, timing=False).summary)


def test_criterion_04_grid_method_ordering(criterion, grid_study):
    lines = []
    ordered = True
    for kind in ("orthogonal", "gaussian", "uniform"):
        means = [grid_study[("grid3x4", kind, m, 8000)]["mean_tmdi"] for m in ("TJADE", "VJADE", "TFOBI", "VFOBI")]
        ordered = ordered and all(a < b for a, b in zip(means, means[1:]))
        lines.append(f"{kind}: " + " < ".join(f"{v:.0f}" for v in means))
    spread = {}
    for method in ("VJADE", "VFOBI"):
        vals = [grid_study[("grid3x4", kind, method, 8000)]["mean_tmdi"] for kind in ("orthogonal", "gaussian", "uniform")]
        spread[method] = max(vals) / min(vals) - 1
    agree = all(s <= 0.10 for s in spread.values())
    decreasing = all(
        grid_study[("grid3x4", kind, m, 1000)]["mean_mdi"]
        > grid_study[("grid3x4", kind, m, 4000)]["mean_mdi"]
        > grid_study[("grid3x4", kind, m, 8000)]["mean_mdi"]
        for kind in ("orthogonal", "gaussian", "uniform")
        for m in ("TJADE", "TFOBI", "VJADE", "VFOBI")
    )
    passed = ordered and agree and decreasing
    criterion(
        4, "TJADE < VJADE < TFOBI < VFOBI at n=8000", passed,
        "; ".join(lines) + f"; vector-method spread {max(spread.values()):.1e}; mean MDI decreasing in n: {decreasing}",
    )  # fmt: skip
    assert passed


@pytest.fixture(scope="module")
def settings_study():
    config = replace(
        ExperimentConfig.load(bundled_config("settings123.json")), ns=(2000, 8000, 16000), reps=100, seed=SEED
    )
    return summary_lookup(run_experiment(config, timing=False).summary)


@pytest.mark.xfail(
    strict=True,
    reason="n(p-1)MDI^2 converges to a limit with finite mean, so TJADE's mean is flat in n "
    "and its order across n is decided by Monte-Carlo noise at 100 reps",
)
def test_criterion_05_assumption_settings(criterion, settings_study):
    ns = (2000, 8000, 16000)
    tj = {s: [settings_study[(s, "identity", "TJADE", n)]["mean_tmdi"] for n in ns] for s in ("setting1", "setting2", "setting3")}
    decreasing = all(v[0] > v[1] > v[2] for v in tj.values())
    base = tj["setting3"][-1]
    ratios = {m: settings_study[("setting3", "identity", m, 16000)]["mean_tmdi"] / base for m in ("TFOBI", "VJADE", "VFOBI")}
    dominated = all(r >= 2 for r in ratios.values())
    failures = sum(settings_study[("setting3", "identity", "VJADE", n)]["nonconverged"] for n in ns)
    passed = decreasing and dominated and failures > 0
    trend = "; ".join(f"{s} " + "/".join(f"{v:.0f}" for v in vals) for s, vals in tj.items())
    criterion(
        5, "TJADE handles settings 1-3", passed,
        f"TJADE decreasing in n: {decreasing} ({trend}); setting3 ratios "
        + ", ".join(f"{m} {r:.0f}x" for m, r in ratios.items())
        + f"; VJADE non-converged {failures}",
    )  # fmt: skip
    assert passed


def test_criterion_06_limiting_variances(criterion):
    profile = asv_profile("grid3x4")
    worst = 0.0
    for mode in (1, 2):
        var, used = monte_carlo_variances("grid3x4", 20_000, 1000, seed=SEED, mode=mode)
        table = asv_table(profile, mode)
        kappa = profile.mode(mode).kappa
        p = kappa.size
        for k in range(p):
            for l in range(p):
                if k != l and (abs(kappa[k]) < 1 or abs(kappa[l]) < 1):
                    continue
                worst = max(worst, abs(var[k, l] / table[k, l] - 1))
    passed = worst <= 0.15
    criterion(6, "Monte-Carlo variances match limiting formula", passed, f"max relative error {worst:.3f} (<= 0.15)")
    assert passed


def test_criterion_07_cumulant_variants_agree(criterion):
    diffs, base = [], []
    for X, mixers in grid_samples(50, 16_000):
        d1 = mdi(kronecker_gain(ica.tjade_fit(X, c=1), mixers))
        d2 = mdi(kronecker_gain(ica.tjade_fit(X, c=2), mixers))
        diffs.append(abs(d1 - d2))
        base.append(d1)
    lhs, rhs = float(np.mean(diffs)), 0.1 * float(np.mean(base))
    passed = lhs < rhs
    criterion(7, "c=1 and c=2 give equivalent separation", passed, f"mean |diff| {lhs:.2e} < {rhs:.2e}")
    assert passed


def test_criterion_08_orthogonal_equivariance(criterion):
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for X, _ in grid_samples(20, 2000):
        V = [haar_orthogonal(p, rng) for p in X.shape[1:]]
        old = ica.tjade_fit(X)
        new = ica.tjade_fit(sample_multi_mode_product(X, V))
        for m in range(len(V)):
            worst = max(worst, mdi(new.phis[m] @ V[m] @ np.linalg.inv(old.phis[m])))
    passed = worst < 1e-6
    criterion(8, "orthogonal equivariance", passed, f"max MDI {worst:.2e} (< 1e-6)")
    assert passed


def test_criterion_09_vector_reduction(criterion):
    rng = np.random.default_rng(SEED)
    equal = True
    for k in range(20):
        p = 2 + k % 4
        x = rng.standard_normal((500, p)) ** 3 @ rng.standard_normal((p, p))
        equal &= np.array_equal(ica.tjade_fit(x).phis[0], ica.jade_fit(x).phis[0])
        equal &= np.array_equal(ica.tfobi_fit(x).phis[0], ica.fobi_fit(x).phis[0])
    criterion(9, "one-mode fits equal vector fits", bool(equal), "bitwise equal on 20 samples")
    assert equal


def cluster_agreement(labels, clusters, k):
    classes = np.unique(labels)
    table = np.array([[np.sum((labels == a) & (clusters == b)) for b in range(k)] for a in classes])
    rows, cols = linear_sum_assignment(table, maximize=True)
    return table[rows, cols].sum() / labels.size


@pytest.mark.xfail(
    not SEMEION.exists(),
    strict=True,
    reason=f"semeion data not found at {SEMEION}; set SEMEION_PATH",
)
def test_criterion_10_semeion_groups(criterion):
    if not SEMEION.exists():
        criterion(10, "semeion digits 0/1/7 form three groups", False, f"data file missing: {SEMEION}")
        pytest.fail(f"semeion data not found at {SEMEION}")
    X, labels = read_semeion(SEMEION, digits=(0, 1, 7))
    sizes = [int(np.sum(labels == d)) for d in (0, 1, 7)]
    model = ica.tjade_fit(X)
    idx, _ = ica.lowest_kurtosis_components(model, X, k=2)
    Y = ica.transform(model, X)
    features = np.column_stack([Y[(slice(None),) + i] for i in idx])
    features = (features - features.mean(axis=0)) / features.std(axis=0)
    _, clusters = kmeans2(features, 3, minit="++", seed=SEED)
    agreement = cluster_agreement(labels, clusters, 3)
    passed = sizes == [161, 162, 158] and agreement >= 0.7
    criterion(10, "semeion digits 0/1/7 form three groups", passed, f"group sizes {sizes}; agreement {agreement:.3f} (>= 0.7)")
    assert passed
