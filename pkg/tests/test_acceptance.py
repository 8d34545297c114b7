"""Acceptance suite: the quantitative validation gates of this project.

Each criterion is one test that prints an `ACCEPTANCE <n>: PASS|FAIL` line
with the measured values (visible with `pytest -s`, or in the failure
output).  Criteria 4-6 execute real simulation campaigns and are marked
`slow`; the whole suite is sized to finish in well under fifteen minutes on
a few cores.

Known status: the cultural-distance behavior meets every target, but three
path-length targets (4b, the path-length half of 5, and the sigma_d
path-length sign in 6) are NOT met by the implemented dynamics.  Those
assertions are kept faithful to the stated targets instead of being
loosened; the mechanism behind the shortfall is documented in
`notes/decisions.md` at the repository root (weak cross-group edges decay
ever more slowly under weight-proportional source selection, so they are
still present at iteration 500 and keep the unweighted path length short
in exactly the runs that should be structurally sparse).
"""

import math
import os
import statistics
import time

import numpy as np
import pytest

from fragnet.analysis import PREDICTORS, anova, fit_ols
from fragnet.engine import SimConfig, init_state, run
from fragnet.metrics import (
    RunResult,
    average_shortest_path_length,
    mean_intergroup_cultural_distance,
    weak_components,
)
from fragnet.model import (
    DiversityParams,
    Network,
    acceptance_probability,
    mix_culture,
    reinforce_weight,
    weaken_weight,
)
from fragnet.sweep import SweepSpec, derive_seed, persist_results, run_sweep

PARALLELISM = max(1, min(4, os.cpu_count() or 1))


def report(number: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {detail}")


# -- criterion 1: equation unit oracles ---------------------------------------


def test_criterion_1_equation_oracles():
    problems = []
    v = np.zeros(10)
    w = np.zeros(10)
    w[0] = 0.5
    if acceptance_probability(v, w, 0.5) != 0.5:
        problems.append("acceptance at distance d is not exactly 0.5")
    if acceptance_probability(v, v, 0.7) != 1.0:
        problems.append("acceptance at distance 0 is not 1")
    for weight in (0.02, 0.5, 0.9):
        for rate in (0.1, 0.5, 1.0):
            if abs(reinforce_weight(weaken_weight(weight, rate), rate) - weight) > 1e-12:
                problems.append(f"inverse pair broken at w={weight}, r={rate}")
    rng = np.random.default_rng(1)
    for _ in range(100):
        a, b = rng.normal(size=6), rng.normal(size=6)
        r_s = float(rng.uniform(0, 1))
        mixed = mix_culture(a, b, r_s)
        expected = (1.0 - r_s) * math.dist(a, b)
        if abs(math.dist(mixed, b) - expected) > 1e-12:
            problems.append("mixing is not convex along the segment")
            break
    report(1, not problems, "equation oracles (acceptance, inverses, convexity)")
    assert not problems, problems


# -- criteria 2 and 3: initialization statistics -------------------------------


@pytest.fixture(scope="module")
def init_statistics():
    cross_means, within_means, intra_counts, inter_counts = [], [], [], []
    for seed in range(100):
        state = init_state(SimConfig(seed=seed))
        g = state.config.group_size
        a, b = state.cultures[:g], state.cultures[g:]
        cross = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
        cross_means.append(float(cross.mean()))
        within = []
        for block in (a, b):
            dist = np.sqrt(((block[:, None, :] - block[None, :, :]) ** 2).sum(-1))
            within.extend(dist[np.triu_indices(g, k=1)].tolist())
        within_means.append(float(np.mean(within)))
        intra = sum(
            1 for s, t, _ in state.network.edges() if (s < g) == (t < g)
        )
        intra_counts.append(intra)
        inter_counts.append(state.network.edge_count - intra)
    return {
        "cross": cross_means,
        "within": within_means,
        "intra": intra_counts,
        "inter": inter_counts,
    }


def test_criterion_2_initial_distance_statistics(init_statistics):
    ratio = np.mean(init_statistics["cross"]) / np.mean(init_statistics["within"])
    cd0 = float(np.mean(init_statistics["cross"]))
    ok = 6.0 <= ratio <= 8.0 and 2.9 <= cd0 <= 3.2
    report(2, ok, f"cross/within ratio {ratio:.3f} in [6, 8]; initial CD {cd0:.3f} in [2.9, 3.2]")
    assert 6.0 <= ratio <= 8.0
    assert 2.9 <= cd0 <= 3.2


def test_criterion_3_initial_densities(init_statistics):
    intra_pairs = 2 * 50 * 49
    inter_pairs = 2 * 50 * 50
    intra = sum(init_statistics["intra"]) / (100 * intra_pairs)
    inter = sum(init_statistics["inter"]) / (100 * inter_pairs)
    ok = 0.19 <= intra <= 0.21 and 0.016 <= inter <= 0.024
    report(3, ok, f"directed densities intra {intra:.4f} in [.19, .21], inter {inter:.4f} in [.016, .024]")
    assert 0.19 <= intra <= 0.21
    assert 0.016 <= inter <= 0.024


# -- criterion 4: baseline fragmentation transition ----------------------------


@pytest.mark.slow
def test_criterion_4_baseline_transition():
    spec = SweepSpec(
        sigma_values=(0.0, 0.1),
        runs_per_cell=25,
        base_config=SimConfig(),
        master_seed=1,
        parallelism=PARALLELISM,
    )
    table = run_sweep(spec)
    defined = [r for r in table.rows if r.spl is not None]
    high = [r for r in defined if r.cd > 1.5]
    assimilated = [r for r in defined if r.cd <= 1.5]
    mean_high = statistics.mean(r.spl for r in high)
    mean_asm = statistics.mean(r.spl for r in assimilated)
    median_asm = statistics.median(r.spl for r in assimilated)
    violations = [r for r in high if r.spl < median_asm]
    # threshold-sensitivity probe across the calibration band
    sensitivity = {}
    for threshold in (1.0, 1.5, 2.0):
        asm_t = [r for r in defined if r.cd <= threshold]
        high_t = [r for r in defined if r.cd > threshold]
        if asm_t and high_t:
            med = statistics.median(r.spl for r in asm_t)
            sensitivity[threshold] = sum(1 for r in high_t if r.spl < med)
    part_a = mean_high > mean_asm
    part_b = len(violations) == 0
    report(
        4,
        part_a and part_b,
        f"(a) mean SPL high-CD {mean_high:.3f} vs assimilated {mean_asm:.3f}; "
        f"(b) {len(violations)} runs in missing regime (target 0); "
        f"violations by CD threshold {sensitivity} over {len(defined)} defined runs",
    )
    assert part_a, "mean SPL of high-CD runs must exceed assimilated runs"
    assert part_b, (
        f"{len(violations)} high-CD runs have SPL below the assimilated median; "
        "the missing regime must be empty in the homogeneous baseline"
    )


# -- criterion 5: tolerance-diversity effect ------------------------------------


@pytest.mark.slow
def test_criterion_5_tolerance_diversity_effect():
    def cell(sigma_d, cell_index):
        results = []
        for k in range(25):
            config = SimConfig(
                seed=derive_seed(2, cell_index, k),
                diversity=DiversityParams(sigma_d=sigma_d, sigma_rs=0.2, sigma_rw=0.2),
            )
            results.append(run(config)[1])
        return results

    low = cell(0.0, 0)
    high = cell(0.5, 1)
    cd_low = [r.cd for r in low]
    cd_high = [r.cd for r in high]
    spl_low = [r.spl for r in low if r.spl is not None]
    spl_high = [r.spl for r in high if r.spl is not None]

    cd_gap = np.mean(cd_high) - np.mean(cd_low)
    cd_se = math.sqrt(np.var(cd_low, ddof=1) / len(cd_low) + np.var(cd_high, ddof=1) / len(cd_high))
    spl_gap = np.mean(spl_high) - np.mean(spl_low)
    spl_se = math.sqrt(np.var(spl_low, ddof=1) / len(spl_low) + np.var(spl_high, ddof=1) / len(spl_high))

    assimilated = [r.spl for r in low + high if r.spl is not None and r.cd <= 1.5]
    if assimilated:
        median_asm = statistics.median(assimilated)
        in_regime = [
            r for r in high if r.cd > 1.5 and r.spl is not None and r.spl < median_asm
        ]
        regime_note = f"{len(in_regime)} runs in high-CD/low-SPL regime (median asm {median_asm:.3f})"
        regime_ok = len(in_regime) >= 1
    else:
        regime_note = "no assimilated runs available to define the low-SPL regime"
        regime_ok = False

    cd_ok = cd_gap > 2 * cd_se
    spl_ok = spl_gap < -2 * spl_se
    report(
        5,
        cd_ok and spl_ok and regime_ok,
        f"CD {np.mean(cd_low):.3f}->{np.mean(cd_high):.3f} (gap {cd_gap:+.3f}, 2SE {2*cd_se:.3f}); "
        f"SPL {np.mean(spl_low):.3f}->{np.mean(spl_high):.3f} (gap {spl_gap:+.3f}, 2SE {2*spl_se:.3f}); "
        + regime_note,
    )
    assert cd_ok, "mean CD must rise with sigma_d by more than twice the standard error"
    assert spl_ok, (
        f"mean SPL must fall with sigma_d by more than twice the standard error "
        f"(measured gap {spl_gap:+.3f}, 2SE {2 * spl_se:.3f})"
    )
    assert regime_ok, regime_note


# -- criterion 6: regression sign reproduction ----------------------------------


@pytest.mark.slow
def test_criterion_6_regression_signs_reduced_scale():
    start = time.perf_counter()
    spec = SweepSpec(
        runs_per_cell=10,
        base_config=SimConfig(),
        master_seed=3,
        parallelism=PARALLELISM,
    )
    table = run_sweep(spec)
    assert len(table.rows) == 2160 and table.complete
    cd_fit = fit_ols(table, "cd")
    spl_fit = fit_ols(table, "spl")
    elapsed = time.perf_counter() - start

    cd_coeffs = cd_fit.coefficients
    spl_coeffs = spl_fit.coefficients
    checks = {
        "cd sigma_d > 0": cd_coeffs["sigma_d"] > 0,
        "cd sigma_rs > 0": cd_coeffs["sigma_rs"] > 0,
        "cd sigma_rw < 0": cd_coeffs["sigma_rw"] < 0,
        "cd sigma_d:sigma_rs < 0": cd_coeffs["sigma_d:sigma_rs"] < 0,
        "spl sigma_d < 0": spl_coeffs["sigma_d"] < 0,
    }
    failed = [name for name, ok in checks.items() if not ok]
    cd_text = ", ".join(f"{t}={cd_coeffs[t]:+.3f}" for t in PREDICTORS)
    spl_text = ", ".join(f"{t}={spl_coeffs[t]:+.4f}" for t in PREDICTORS)
    report(
        6,
        not failed,
        f"2160 runs in {elapsed:.0f}s; cd: [{cd_text}]; spl: [{spl_text}]; "
        f"spl rows excluded {spl_fit.n_excluded}; failed: {failed or 'none'}",
    )
    assert not failed, f"regression sign targets not met: {failed}"


# -- criterion 7: analysis oracles ----------------------------------------------


def test_criterion_7_analysis_oracles():
    problems = []

    # (i) noise-free coefficient recovery to 1e-9
    rows = []
    seed = 0
    for sd in (0.0, 0.25, 0.5):
        for ss in (0.0, 0.25, 0.5):
            for sw in (0.0, 0.25, 0.5):
                rows.append(
                    RunResult(sd, ss, sw, 0, seed, 2.0 + 3.0 * sd - sw, 2.0, 10, 1, 0)
                )
                seed += 1
    fit = fit_ols(rows, "cd")
    targets = {"intercept": 2.0, "sigma_d": 3.0, "sigma_rs": 0.0, "sigma_rw": -1.0,
               "sigma_d:sigma_rs": 0.0, "sigma_d:sigma_rw": 0.0, "sigma_rs:sigma_rw": 0.0}
    for term, target in targets.items():
        if abs(fit.coefficients[term] - target) > 1e-9:
            problems.append(f"coefficient {term} off target")

    # (ii) ANOVA additivity to 1e-8 relative on a stochastic table
    rng = np.random.default_rng(99)
    noisy = [
        RunResult(sd, ss, sw, k, 0, float(sd - ss + rng.normal(0, 0.2)), 2.0, 10, 1, 0)
        for sd in (0.0, 0.2, 0.4)
        for ss in (0.0, 0.2, 0.4)
        for sw in (0.0, 0.2, 0.4)
        for k in range(3)
    ]
    var = anova(noisy, "cd")
    recomposed = sum(r.ss for r in var.terms) + var.error_ss
    if abs(recomposed - var.total_ss) > 1e-8 * var.total_ss:
        problems.append("sequential SS do not add up to the total SS")

    # (iii) hand-worked balanced ANOVA to 1e-9
    hand = [
        RunResult(sd, ss, sw, k, 0, 10.0 * sd + (0.5 if k == 0 else -0.5), 2.0, 10, 1, 0)
        for sd in (0.0, 0.4)
        for ss in (0.0, 0.4)
        for sw in (0.0, 0.4)
        for k in range(2)
    ]
    hand_table = anova(hand, "cd")
    ss_by_term = {r.term: r.ss for r in hand_table.terms}
    if abs(ss_by_term["sigma_d"] - 64.0) > 1e-9 or abs(hand_table.error_ss - 4.0) > 1e-9:
        problems.append("hand-worked ANOVA sums of squares do not match")
    f_stat = next(r for r in hand_table.terms if r.term == "sigma_d").f
    if abs(f_stat - 144.0) > 1e-6:
        problems.append("hand-worked ANOVA F statistic does not match")

    # (iv) path length equals a Floyd-Warshall oracle on 200 random graphs
    from test_metrics import floyd_warshall_spl, random_network

    rng = np.random.default_rng(123)
    for _ in range(200):
        net = random_network(rng, max_nodes=30)
        if average_shortest_path_length(net) != floyd_warshall_spl(net):
            problems.append("BFS path length disagrees with Floyd-Warshall")
            break

    report(7, not problems, "analysis oracles (OLS 1e-9, SS additivity, hand ANOVA, 200-graph SPL oracle)")
    assert not problems, problems


# -- criterion 8: determinism and parallel safety --------------------------------


@pytest.mark.slow
def test_criterion_8_parallel_determinism(tmp_path):
    # smoke spec: 27 cells x 1 run at the default run length (the smallest
    # sigma cube of order twenty cells)
    def sweep_with(workers):
        spec = SweepSpec(
            sigma_values=(0.0, 0.2, 0.4),
            runs_per_cell=1,
            base_config=SimConfig(),
            master_seed=8,
            parallelism=workers,
        )
        return run_sweep(spec)

    table_1 = sweep_with(1)
    table_8 = sweep_with(8)
    path_1 = tmp_path / "par1.csv"
    path_8 = tmp_path / "par8.csv"
    persist_results(table_1, path_1)
    persist_results(table_8, path_8)
    identical = path_1.read_bytes() == path_8.read_bytes()
    report(8, identical and table_1 == table_8,
           f"27-cell smoke sweep: parallelism 1 vs 8 byte-identical={identical}")
    assert table_1 == table_8
    assert identical


# -- criterion 9: optional probe, globally raised tolerance ----------------------


@pytest.mark.slow
def test_criterion_9_global_tolerance_probe():
    cds = []
    for k in range(25):
        config = SimConfig(
            seed=derive_seed(9, 0, k), diversity=DiversityParams(mean_d=2.0)
        )
        cds.append(run(config)[1].cd)
    mean_cd = float(np.mean(cds))
    ok = mean_cd < 0.5
    report(9, ok, f"globally raised tolerance (mean d=2.0): mean CD {mean_cd:.4f} < 0.5 "
                  "(uniform high tolerance erases cultural diversity)")
    assert ok
