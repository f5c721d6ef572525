"""Acceptance criteria, each at full scale with its stated tolerance and time budget."""
import time

import numpy as np
import pytest

from raylab import channels, cli, experiments, grover, hilbert

SEED = 20240611


def run_experiment(name, **params):
    t0 = time.perf_counter()
    report = experiments.run({"experiment": name, "seed": SEED, "params": params})
    return {c.id: c for c in report.checks}, time.perf_counter() - t0, report


@pytest.fixture(scope="module")
def superpose():
    return run_experiment("superpose", samples=1000, dim_min=2, dim_max=6)


def verdict(checks, ids):
    return all(checks[i].passed for i in ids), "; ".join(
        f"{i.split('.')[-1]}={checks[i].measured:.3g}" for i in ids)


def test_c01_gauge_invariance(superpose, acceptance):
    checks, secs, _ = superpose
    ok, detail = verdict(checks, ["superposer.gauge_invariance"])
    ok = ok and checks["superposer.gauge_invariance"].threshold == 1e-10 and secs < 10
    assert acceptance(1, "gauge invariance over 1000 samples", ok, f"{detail}; {secs:.2f}s")


def test_c02_projector_vector_equivalence(superpose, acceptance):
    checks, secs, _ = superpose
    ok, detail = verdict(checks, ["superposer.formula_equivalence"])
    assert acceptance(2, "projector/vector equivalence", ok and secs < 10, f"{detail}; {secs:.2f}s")


def test_c03_protocol_success_law(superpose, acceptance):
    checks, secs, report = superpose
    ok, detail = verdict(checks, ["superposer.protocol_law", "superposer.canonical_success", "channels.cptni"])
    canonical = dict(report.tables["canonical"]["rows"])["success_simulated"]
    ok = ok and abs(canonical - 0.5690355937288492) < 1e-9 and secs < 10
    assert acceptance(3, "protocol success law", ok, f"{detail}; P_canon={canonical:.10f}; {secs:.2f}s")


def test_c04_ud_both_directions(acceptance):
    checks, secs, _ = run_experiment("ud", independent_families=500, dependent_families=500, dim_max=6)
    ok, detail = verdict(checks, ["nogo.ud_cross_terms", "nogo.ud_inconclusive_psd", "nogo.ud_completeness",
                                  "nogo.ud_converse", "nogo.ud_null_vector", "nogo.ud_canonical_lambda"])
    assert acceptance(4, "UD feasible iff independent", ok and secs < 30, f"{detail}; {secs:.2f}s")


def test_c05_ldli_phase_condition(acceptance):
    checks, secs, report = run_experiment("ldli", samples=10000, gauge_draws=1000, dim=3)
    ok, detail = verdict(checks, ["nogo.phase_condition_equivalence", "nogo.gauge_base_residual",
                                  "nogo.gauge_fragility"])
    summary = dict(report.tables["summary"]["rows"])
    # both sides of the equivalence must actually be exercised
    ok = ok and 0 < summary["dependent"] < summary["samples"] and secs < 30
    assert acceptance(5, "LD->LI phase condition", ok,
                      f"{detail}; dependent={summary['dependent']}/{summary['samples']}; {secs:.2f}s")


def test_c06_signaling_counterfactual(acceptance):
    checks, secs, report = run_experiment("signal", repetitions=[10, 100], trials=1000, bob_povms=1000)
    ok, detail = verdict(checks, ["signaling.gap_p0", "signaling.gap_p1", "signaling.bob_state",
                                  "signaling.decode_r100", "signaling.no_signaling_restoration"])
    gap = dict(report.tables["gap"]["rows"])
    assert acceptance(6, "signaling counterfactual", ok and secs < 60,
                      f"P0={gap['P0']:.12g}; P1={gap['P1']:.12g}; {detail}; {secs:.2f}s")


def test_c07_super_grover_collapse(acceptance):
    checks, secs, _ = run_experiment("grover", N=1024, standard_rounds=25, crosscheck_max_n=14)
    ok, detail = verdict(checks, ["grover.recursion_fidelity", "grover.growth_bound",
                                  "grover.round_bound", "grover.query_accounting"])
    t0 = time.perf_counter()
    run = grover.super_grover_run(grover.GroverInstance(10, 0), 0.25)
    p3 = run.probabilities[3]
    four = grover.fixed_rounds(grover.GroverInstance(2, 1), 1, "standard", mode="statevector")
    extra = [
        run.rounds[-1] == 3 and run.queries == 3,
        grover.round_bound(1024) == 4,
        abs(p3 - 0.5583559233055561) < 1e-9,
        abs(four.probabilities[1] - 1) < 1e-12 and four.queries == 1,
    ]
    secs += time.perf_counter() - t0
    ok = ok and all(extra) and secs < 60
    assert acceptance(7, "super-Grover collapse", ok,
                      f"{detail}; rounds={run.rounds[-1]}; p3={p3:.10f}; N=4 p={four.probabilities[1]:.12g}; "
                      f"{secs:.2f}s")


def test_c08_circle_geometry(acceptance):
    checks, secs, report = run_experiment("circle", grid=[400, 800], promise=0.5, haar_points=200)
    ok, detail = verdict(checks, ["geometry.success_nonempty", "geometry.circle_fit",
                                  "geometry.circle_match", "geometry.haar_rejected"])
    fit = report.tables["constraint"]["rows"][0][:4]
    ok = ok and np.allclose(fit, [1, 0, 0, 0], atol=1e-6) and secs < 120
    assert acceptance(8, "circle geometry", ok,
                      f"fit={np.round(fit, 9).tolist()}; {detail}; {secs:.2f}s")


def test_c09_channel_algebra(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_choi, worst_trip, worst_trace = np.inf, 0.0, -np.inf
    for _ in range(1000):
        din, dout, nk = (int(x) for x in rng.integers(1, 5, size=3))
        ch = channels.random_channel(din, dout, nk, rng, trace_preserving=bool(rng.random() < 0.5 and nk * dout >= din))
        assert channels.is_cptni(ch).ok
        j = channels.choi_matrix(ch)
        worst_choi = min(worst_choi, hilbert.eigvalsh_sym(j)[0])
        rho = hilbert.random_density(din, rng)
        worst_trip = max(worst_trip, np.abs(channels.apply_choi(j, rho, din, dout) - channels.apply(ch, rho)).max())
        worst_trace = max(worst_trace, channels.success_probability(ch, rho) - 1)
    secs = time.perf_counter() - t0
    ok = worst_choi >= -1e-10 and worst_trip < 1e-10 and worst_trace <= 1e-10 and secs < 10
    assert acceptance(9, "channel algebra over 1000 channels", ok,
                      f"min_choi_eig={worst_choi:.3g}; round_trip={worst_trip:.3g}; "
                      f"trace_excess={worst_trace:.3g}; {secs:.2f}s")


def test_c10_determinism(tmp_path, acceptance, capsys):
    identical = []
    for name in experiments.EXPERIMENTS:
        blobs = []
        for k in range(2):
            for fmt in ("json", "csv"):
                out = tmp_path / f"{name}-{fmt}-{k}"
                cli.main([name, "--seed", str(SEED), "--format", fmt, "--out", str(out)])
                blobs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())
                              if not p.name.endswith(".timings.json")})
        identical.append(blobs[0] == blobs[2] and blobs[1] == blobs[3] and blobs[0])
    capsys.readouterr()
    ok = all(identical)
    assert acceptance(10, "byte-identical CLI reports", ok,
                      f"{sum(map(bool, identical))}/{len(identical)} experiments identical in json and csv")
