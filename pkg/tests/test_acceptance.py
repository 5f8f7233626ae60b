"""Numbered acceptance criteria.

Each criterion returns ``(passed, detail)``; the pytest wrappers assert on it
and ``conftest.py`` prints one PASS/FAIL line per criterion in the summary.
Running this file directly prints the same lines.
"""

import math

import numpy as np
import pytest

from ptrdual import (
    BS,
    PDC,
    TwoModeState,
    apply,
    bs_element,
    check_trace_identity,
    classical_bs,
    classical_pdc,
    coincidence_bs,
    coincidence_pdc,
    dense_oracle,
    duality_consistency,
    duality_sweep,
    few_photon_table,
    pair_distribution,
    partial_coincidence,
    retro_check,
    squeezing_db,
    threshold_gain,
    w_scalar,
)
from ptrdual.experiment import ExperimentConfig, analyze, run_experiment
from ptrdual.interference import PathAmplitudes, pair_probability

RESULTS: dict[int, tuple[bool, str]] = {}


def _record(number, checks):
    """``checks`` is a list of ``(ok, text)``; the criterion passes when all do."""
    ok = all(c for c, _ in checks)
    detail = "; ".join(f"{t} [{'ok' if c else 'FAIL'}]" for c, t in checks)
    RESULTS[number] = (ok, detail)
    return ok, detail


def criterion_1():
    c = coincidence_bs(0.5)
    e = bs_element(1, 1, 1, 1, 0.5)
    return _record(1, [(abs(c) <= 1e-12, f"coincidence_bs(0.5)={c:.3e}"),
                       (abs(e) <= 1e-12, f"<1,1|U_BS|1,1>={e:.3e}")])


def criterion_2():
    c = coincidence_pdc(2.0)
    amp = dense_oracle(PDC(2.0), 40).element(1, 1, 1, 1)
    return _record(2, [(abs(c) <= 1e-12, f"coincidence_pdc(2)={c:.3e}"),
                       (abs(amp) <= 1e-9, f"oracle <1,1|U_PDC|1,1>={abs(amp):.3e}")])


def criterion_3():
    out = apply(PDC(2.0), TwoModeState.basis(1, 1, 60))
    n = np.arange(13)
    want = 0.5 * (n - 1) / 2.0 ** (n / 2)
    got = np.array([out[k, k] for k in n])
    err = float(np.abs(got - want).max())
    off = out.grid.copy()
    off[np.diag_indices_from(off)] = 0.0
    return _record(3, [(err <= 1e-10, f"max |amp - (n-1)/2^(n/2+1)| for n<=12 = {err:.2e}"),
                       (abs(got[0] + 0.5) <= 1e-10, f"vacuum amplitude {got[0].real:+.12f}"),
                       (abs(got[2] - math.sqrt(1 / 4) / 2) <= 1e-10,
                        f"|2,2> amplitude {got[2].real:.12f}"),
                       (np.abs(off).max() <= 1e-12, "no off-diagonal amplitude")])


def criterion_4():
    checks = []
    for g in (1.25, 2.0, math.e, 4.0):
        rows = few_photon_table(g)
        closed = max(r.closed_err for r in rows)
        oracle = max(r.oracle_err for r in rows)
        checks.append((closed <= 1e-12 and oracle <= 1e-9,
                       f"g={g:.4g}: closed {closed:.1e}, oracle {oracle:.1e}"))
    return _record(4, checks)


def criterion_5():
    worst = duality_sweep(10, (1.25, 1.5, 2.0, math.e, 4.0))
    return _record(5, [(worst <= 1e-10, f"max duality residual {worst:.2e} over counts <= 10")])


def criterion_6():
    checks = []
    for g in (1.5, 2.0, 3.0):
        w = w_scalar(g, 40)
        checks.append((abs(w.value - 1 / g) <= 1e-8 and w.off_diagonal <= 1e-8,
                       f"g={g}: |W-1/g|={abs(w.value - 1 / g):.1e}, off-diag {w.off_diagonal:.1e}"))
    return _record(6, checks)


def criterion_7():
    checks = []
    for g in (2, 3, 4, 5):
        p = pair_probability(g - 1, float(g))
        checks.append((p == 0.0, f"P_{g - 1}(g={g})={p}"))
    for g, n in ((3.0, 2), (4.0, 3)):
        dist = pair_distribution(g, 10).probs
        dip = dist[n] == 0.0 and dist[n - 1] > 0.0 and dist[n + 1] > 0.0
        checks.append((dip, f"dip at n={n} for g={g:g}"))
    worst = max(duality_consistency(n, g) for n in range(1, 11) for g in (1.25, 1.5, 2.0, 3.0, 4.0, 5.0))
    checks.append((worst <= 1e-12, f"duality_consistency max {worst:.1e} for 1 <= n <= 10"))
    return _record(7, checks)


def criterion_8():
    g_star = threshold_gain(0.25)
    db2, db128, db_star = squeezing_db(2.0), squeezing_db(1.28), squeezing_db(g_star)
    return _record(8, [
        (classical_bs(0.5) == 0.5, f"classical_bs(1/2)={classical_bs(0.5)}"),
        (classical_pdc(2.0) == 0.25, f"classical_pdc(2)={classical_pdc(2.0)}"),
        (abs(g_star - 1.28) <= 0.005, f"threshold_gain(1/4)={g_star:.6f}"),
        (abs(db2 - 7.66) <= 0.01, f"squeezing_db(2)={db2:.4f}"),
        (abs(db128 - 4.39) <= 0.01,
         f"squeezing_db(1.28)={db128:.4f} (unrounded threshold gives {db_star:.4f})"),
    ])


def criterion_9():
    checks = []
    for g in (1.5, 2.0, 3.0):
        r = retro_check(g, 3, 24)
        checks.append((r.max_discrepancy <= 1e-8 and r.compared == 16,
                       f"g={g}: max |bayes-ptr| {r.max_discrepancy:.1e} over {r.compared} (i,m)"))
    return _record(9, checks)


def _random_hermitian(rng, d, k):
    a = np.zeros((d, d), dtype=complex)
    a[:k, :k] = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    return a + a.conj().T


def criterion_10():
    d, n_max = 21, 20
    proj = np.zeros((4, d, d))
    for idx, (p, q) in enumerate([(0, 0), (1, 1), (2, 2), (3, 3)]):
        proj[idx, p, q] = 1.0
    checks = []
    for g in (1.5, 2.0):
        worst = max(check_trace_identity(proj[a], proj[b], proj[c], proj[e], g, n_max)
                    for a in range(4) for b in range(4) for c in range(4) for e in range(4))
        rng = np.random.default_rng(20240 + int(10 * g))
        rand = max(check_trace_identity(*(_random_hermitian(rng, d, 6) for _ in range(4)), g, n_max)
                   for _ in range(5))
        checks.append((worst <= 1e-8 and rand <= 1e-8,
                       f"g={g}: projectors {worst:.1e}, random Hermitian {rand:.1e}"))
    return _record(10, checks)


def _mc(g):
    cfg = ExperimentConfig(gain=g, shots=10 ** 6, seed=11)
    rep = analyze(run_experiment(cfg), cfg)
    p = coincidence_pdc(g)
    sigma = math.sqrt(rep.heralded_shots * p * (1 - p))
    dev = abs(rep.coincidences - rep.heralded_shots * p)
    return rep, dev <= 5 * sigma, dev / sigma if sigma else float(dev)


def criterion_11():
    checks = []
    for g in (2.0, 4.0):
        rep, ok, z = _mc(g)
        checks.append((ok, f"g={g:g}: {rep.coincidences}/{rep.heralded_shots}={rep.estimate:.4f} "
                           f"vs {coincidence_pdc(g):.4f} ({z:.2f} sigma)"))
    s = np.linspace(0.0, 1.0, 11)
    for coupler in (BS(0.3), BS(0.5), PDC(1.5), PDC(2.0), PDC(4.0)):
        paths = PathAmplitudes.of(coupler)
        curve = np.array([partial_coincidence(coupler, x) for x in s])
        ends = abs(curve[0] - paths.classical) <= 1e-15 and abs(curve[-1] - paths.quantum) <= 1e-15
        affine = np.abs(np.diff(curve, 2)).max() <= 1e-14
        monotone = np.all(np.diff(curve) <= 1e-15)
        checks.append((ends and affine and monotone, f"s-interpolation {coupler}"))
    return _record(11, checks)


def criterion_12():
    checks = []
    for g in (1.5, 2.0, 3.0, 4.0):
        err = abs(pair_distribution(g, 60).total() - 1.0)
        checks.append((err <= 1e-12, f"g={g:g}: |sum-1|={err:.1e}"))
    eta = np.linspace(0.0, 1.0, 1001)
    gains = np.linspace(1.0, 10.0, 1001)
    bs_gap = max(abs(classical_bs(x) - coincidence_bs(x) - 2 * x * (1 - x)) for x in eta)
    pdc_gap = max(abs(classical_pdc(x) - coincidence_pdc(x) - 2 * (x - 1) / x ** 3) for x in gains)
    ordered = all(coincidence_bs(x) <= classical_bs(x) + 1e-15 for x in eta) and \
        all(coincidence_pdc(x) <= classical_pdc(x) + 1e-15 for x in gains)
    checks.append((bs_gap <= 1e-14 and pdc_gap <= 1e-14 and ordered,
                   f"gap formulas bs {bs_gap:.1e}, pdc {pdc_gap:.1e}, quantum <= classical"))
    return _record(12, checks)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


def format_line(number: int) -> str:
    ok, detail = RESULTS[number]
    return f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"


@pytest.mark.parametrize("number", range(1, 13))
def test_criterion(number):
    ok, _ = CRITERIA[number - 1]()
    print(format_line(number))
    assert ok, format_line(number)


if __name__ == "__main__":
    for k, fn in enumerate(CRITERIA, 1):
        fn()
        print(format_line(k))
