"""Seeded experiment suites behind the command line.

Every random draw comes from ``SeedSequence([master_seed, stream, index])``:
``stream`` is a fixed integer per sweep and ``index`` the sample number. A
sample therefore sees the same numbers no matter how the sweep is split
across workers, and results are reduced in index order.
"""
from __future__ import annotations

import copy
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from raylab import channels, geometry, grover, hilbert, nogo, signaling, superposer
from raylab.report import RunReport

EXPERIMENTS = ("superpose", "ldli", "ud", "signal", "grover", "circle")

DEFAULT_PARAMS = {
    "superpose": {"samples": 1000, "dim_min": 2, "dim_max": 6},
    "ldli": {"samples": 10000, "gauge_draws": 1000, "dim": 3},
    "ud": {"independent_families": 500, "dependent_families": 500, "dim_max": 6},
    "signal": {"repetitions": [0, 1, 10, 25, 50, 100, 200], "trials": 1000,
               "bob_povms": 1000, "success_prob": 0.5, "off_set_policy": "zero"},
    "grover": {"N": 1024, "standard_rounds": 25, "crosscheck_max_n": 14},
    "circle": {"grid": [400, 800], "promise": 0.5, "haar_points": 200},
}
STOCHASTIC = {"superpose", "ldli", "ud", "signal", "circle"}
TOP_LEVEL_KEYS = {"experiment", "seed", "params", "tolerances", "output", "workers"}
OUTPUT_KEYS = {"dir", "format"}

# one stream id per random sweep; never reuse or renumber
STREAMS = {
    "superpose.ensemble": 1, "superpose.gauge": 2, "superpose.convention": 3,
    "ldli.scenarios": 10, "ldli.gauge": 11,
    "ud.independent": 20, "ud.dependent": 21,
    "signal.decode": 30, "signal.restoration": 31,
    "circle.haar": 40,
}


class ConfigError(ValueError):
    pass


def validate_config(config: dict) -> dict:
    """Fill defaults and reject anything unknown; returns a new dict."""
    if not isinstance(config, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(config) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    name = config.get("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {EXPERIMENTS}")
    params = copy.deepcopy(DEFAULT_PARAMS[name])
    given = config.get("params") or {}
    bad = set(given) - set(params)
    if bad:
        raise ConfigError(f"unknown parameters for {name}: {sorted(bad)}")
    params.update(given)
    seed = config.get("seed")
    if name in STOCHASTIC and seed is None:
        raise ConfigError(f"experiment {name} is stochastic and needs a master seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)
                             or not 0 <= seed < 2 ** 64):
        raise ConfigError("seed must be an unsigned 64-bit integer")
    tolerances = dict(config.get("tolerances") or {})
    for k, v in tolerances.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool) or v <= 0:
            raise ConfigError(f"tolerance {k!r} must be a positive number")
    output = dict(config.get("output") or {})
    if set(output) - OUTPUT_KEYS:
        raise ConfigError(f"unknown output keys: {sorted(set(output) - OUTPUT_KEYS)}")
    if output.get("format", "json") not in ("json", "csv"):
        raise ConfigError("output format must be json or csv")
    workers = config.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers must be a positive integer")
    return {"experiment": name, "seed": seed, "params": params, "tolerances": tolerances,
            "output": output, "workers": workers}


def sub_rng(seed: int, stream: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, STREAMS[stream], index]))


def ordered_map(fn: Callable, items, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


class _Tolerances:
    """Check thresholds: a per-check override beats ``"*"``, which beats the default.

    Only deviation-type checks consult this; rate and count checks have fixed
    thresholds.
    """

    def __init__(self, overrides: dict):
        self.overrides = overrides

    def __call__(self, check_id: str, default: float) -> float:
        return float(self.overrides.get(check_id, self.overrides.get("*", default)))


def _random_weights(rng) -> superposer.SuperpositionWeights:
    u = rng.uniform(0.05, np.pi / 2 - 0.05)
    return superposer.SuperpositionWeights(np.cos(u) * np.exp(1j * rng.uniform(0, 2 * np.pi)),
                                           np.sin(u) * np.exp(1j * rng.uniform(0, 2 * np.pi)))


def _promise_sample(rng, dim_min, dim_max):
    d = int(rng.integers(dim_min, dim_max + 1))
    chi = hilbert.random_state(d, rng)
    c1, c2 = rng.uniform(0.05, 1.0, size=2)
    psi = superposer.promise_state(chi, c1, rng)
    phi = superposer.promise_state(chi, c2, rng)
    return chi, psi, phi, superposer.OverlapPromise(float(c1), float(c2)), _random_weights(rng)


def run_superpose(cfg: dict, tol: _Tolerances, report: RunReport) -> None:
    p, seed = cfg["params"], cfg["seed"]

    def sample(i):
        rng = sub_rng(seed, "superpose.ensemble", i)
        chi, psi, phi, promise, w = _promise_sample(rng, p["dim_min"], p["dim_max"])
        base = superposer.reference_superposition(chi, psi, phi, w)
        g = sub_rng(seed, "superpose.gauge", i).uniform(0, 2 * np.pi, size=3)
        moved = superposer.reference_superposition(
            hilbert.rephase(chi, g[0]), hilbert.rephase(psi, g[1]), hilbert.rephase(phi, g[2]), w)
        gauge_dev = 1 - hilbert.overlap_probability(base.ray, moved.ray)
        proj = superposer.reference_superposition_projector(
            hilbert.ray_from_vector(chi), hilbert.ray_from_vector(psi), hilbert.ray_from_vector(phi), w)
        vec = base.unnormalized_vector
        formula_dev = np.linalg.norm(proj - np.outer(vec, vec.conj()), 2)
        ch = superposer.build_reference_protocol(chi, promise, w)
        cptni = channels.is_cptni(ch)
        sim, form = superposer.protocol_success_probability(ch, chi, psi, phi, promise, w)
        theta = float(rng.uniform(0, 2 * np.pi))
        terms = superposer.interference_expansion(psi, phi, w, theta)
        direct = np.linalg.norm(w.alpha * psi + w.beta * np.exp(1j * theta) * phi) ** 2
        return (gauge_dev, formula_dev, abs(sim - form), cptni.max_eigenvalue, abs(terms.norm_sq - direct))

    results = np.array(ordered_map(sample, range(p["samples"]), cfg["workers"]))
    report.check("superposer.gauge_invariance", "max ray infidelity under independent rephasings",
                 results[:, 0].max(), "<", tol("superposer.gauge_invariance", 1e-10))
    report.check("superposer.formula_equivalence", "max operator-norm gap, projector vs vector form",
                 results[:, 1].max(), "<", tol("superposer.formula_equivalence", 1e-10))
    report.check("superposer.protocol_law", "max |simulated - formula| success probability",
                 results[:, 2].max(), "<", tol("superposer.protocol_law", 1e-9))
    report.check("channels.cptni", "max effect eigenvalue over compiled protocols",
                 results[:, 3].max(), "<=", 1 + tol("channels.cptni", 1e-10))
    report.check("superposer.norm_law", "max norm-law deviation",
                 results[:, 4].max(), "<", tol("superposer.norm_law", 1e-12))

    chi = psi = np.array([1, 0], dtype=complex)
    phi = np.array([1, 1], dtype=complex) / np.sqrt(2)
    w = superposer.SuperpositionWeights.balanced()
    promise = superposer.OverlapPromise(1.0, 0.5)
    ch = superposer.build_reference_protocol(chi, promise, w)
    sim, form = superposer.protocol_success_probability(ch, chi, psi, phi, promise, w)
    expected = (1 + 1 / np.sqrt(2)) / 3
    report.check("superposer.canonical_success", "|P_succ - (1 + 1/sqrt2)/3| on the canonical triple",
                 abs(sim - expected), "<", tol("superposer.canonical_success", 1e-9))

    # convention dependence: same rays, two references, equal moduli, different phases
    moduli, phases = [], []
    for i in range(50):
        rng = sub_rng(seed, "superpose.convention", i)
        r1, r2 = (hilbert.ray_from_vector(hilbert.random_state(3, rng)) for _ in range(2))
        c_a = superposer.PhaseConvention(hilbert.random_state(3, rng))
        c_b = superposer.PhaseConvention(hilbert.random_state(3, rng))
        z_a, z_b = c_a.overlap(r1, r2), c_b.overlap(r1, r2)
        moduli.append(abs(abs(z_a) ** 2 - abs(z_b) ** 2))
        phases.append(abs(np.angle(z_a / z_b)))
    report.check("superposer.convention_moduli", "max |modulus^2 difference| across conventions",
                 max(moduli), "<", tol("superposer.convention_moduli", 1e-12))
    report.check("superposer.convention_phase", "largest phase difference across conventions (rad)",
                 max(phases), ">", 0.1)
    report.table("canonical", ["quantity", "value"], [
        ["success_simulated", sim], ["success_formula", form],
        ["max_effect_eigenvalue", channels.is_cptni(ch).max_eigenvalue],
        ["effect_bound", superposer.protocol_bound(promise, w)]])


def run_ldli(cfg: dict, tol: _Tolerances, report: RunReport) -> None:
    p, seed = cfg["params"], cfg["seed"]

    def sample(i):
        rng = sub_rng(seed, "ldli.scenarios", i)
        sc = nogo.random_ldli_scenario(rng, on_condition=bool(i % 2), dim=p["dim"])
        smin = nogo.construct_ldli(sc).smallest_singular_value
        res = nogo.phase_condition_residual(sc)
        return smin, res

    rows = np.array(ordered_map(sample, range(p["samples"]), cfg["workers"]))
    dependent = rows[:, 0] < 1e-10
    on_condition = rows[:, 1] < 1e-8
    counterexamples = int(np.sum(dependent != on_condition))
    report.check("nogo.phase_condition_equivalence", "scenarios where dependence and phase condition disagree",
                 counterexamples, "<=", 0)

    def gauge(i):
        rng = sub_rng(seed, "ldli.gauge", i)
        sc = nogo.random_ldli_scenario(rng, on_condition=True, dim=p["dim"])
        g1, g2 = rng.uniform(0, 2 * np.pi, size=2)
        return nogo.phase_condition_residual(sc), nogo.phase_condition_residual(sc.gauge_shifted(g1, g2))

    g = np.array(ordered_map(gauge, range(p["gauge_draws"]), cfg["workers"]))
    report.check("nogo.gauge_base_residual", "max residual before gauge shift",
                 g[:, 0].max(), "<", tol("nogo.gauge_base_residual", 1e-10))
    report.check("nogo.gauge_fragility", "fraction of gauge shifts with residual > 1e-3",
                 float(np.mean(g[:, 1] > 1e-3)), ">", 0.99)
    # one counterfactual branch and one physical channel through the same discrimination pipeline
    r = 2 ** -0.5
    canon = nogo.LdliScenario(r, r, 0.0, 0.0, 0.0, superposer.SuperpositionWeights.balanced())
    rays = [hilbert.ray_from_vector(v) for v in canon.inputs()]
    fake = nogo.discrimination_pipeline(nogo.hypothetical_superposer_branch(canon), rays)
    chi = hilbert.normalize(np.ones(3))
    c = abs(np.vdot(chi, canon.phi)) ** 2
    physical = nogo.restricted_map(
        superposer.build_reference_protocol(chi, superposer.OverlapPromise(c, c),
                                            superposer.SuperpositionWeights.balanced()), canon.phi)
    real = nogo.discrimination_pipeline(physical, rays)
    report.check("nogo.counterfactual_witness", "counterfactual branch flagged as a violation witness",
                 float(fake.violation), ">=", 1.0)
    report.check("nogo.physical_no_violation", "compiled physical channel flagged as a violation",
                 float(real.violation), "<=", 0.0)
    report.witnesses = [dict(fake.witness_record(), source="counterfactual_branch"),
                        dict(real.witness_record(), source="compiled_protocol")]
    report.table("summary", ["quantity", "value"], [
        ["samples", p["samples"]], ["dependent", int(dependent.sum())],
        ["on_condition", int(on_condition.sum())], ["counterexamples", counterexamples],
        ["max_sigma_min_dependent", float(rows[dependent, 0].max()) if dependent.any() else 0.0],
        ["min_sigma_min_independent", float(rows[~dependent, 0].min()) if (~dependent).any() else 0.0],
        ["gauge_fragility_rate", float(np.mean(g[:, 1] > 1e-3))]])


def _independent_family(rng, dim_max):
    d = int(rng.integers(1, dim_max + 1))
    m = int(rng.integers(1, d + 1))
    return [hilbert.random_state(d, rng) for _ in range(m)]


def _dependent_family(rng, dim_max):
    d = int(rng.integers(2, dim_max + 1))
    span = int(rng.integers(1, d))
    m = int(rng.integers(span + 1, span + 3))
    basis = [hilbert.random_state(d, rng) for _ in range(span)]
    fam = []
    for _ in range(m):
        c = rng.standard_normal(span) + 1j * rng.standard_normal(span)
        fam.append(hilbert.normalize(sum(ci * b for ci, b in zip(c, basis))))
    return fam


def run_ud(cfg: dict, tol: _Tolerances, report: RunReport) -> None:
    p, seed = cfg["params"], cfg["seed"]

    def forward(i):
        fam = _independent_family(sub_rng(seed, "ud.independent", i), p["dim_max"])
        povm = nogo.build_ud_povm(fam)
        if isinstance(povm, nogo.Infeasible):
            return (np.inf, np.inf, np.inf, 0.0)
        t = povm.cross_terms(fam)
        off = np.abs(t - np.diag(np.diag(t))).max()
        return (off, -hilbert.eigvalsh_sym(povm.inconclusive)[0], povm.completeness_error(),
                float(np.diag(t).min()))

    def converse(i):
        fam = _dependent_family(sub_rng(seed, "ud.dependent", i), p["dim_max"])
        res = nogo.build_ud_povm(fam)
        if not isinstance(res, nogo.Infeasible):
            return (0.0, np.inf)
        return (1.0, res.residual)

    f = np.array(ordered_map(forward, range(p["independent_families"]), cfg["workers"]))
    c = np.array(ordered_map(converse, range(p["dependent_families"]), cfg["workers"]))
    report.check("nogo.ud_cross_terms", "max off-diagonal <v_j|E_i|v_j>", f[:, 0].max(), "<",
                 tol("nogo.ud_cross_terms", 1e-10))
    report.check("nogo.ud_inconclusive_psd", "max negative eigenvalue of the inconclusive element",
                 f[:, 1].max(), "<=", tol("nogo.ud_inconclusive_psd", 1e-10))
    report.check("nogo.ud_completeness", "max completeness error", f[:, 2].max(), "<",
                 tol("nogo.ud_completeness", 1e-10))
    report.check("nogo.ud_success_positive", "min conclusive success probability", f[:, 3].min(), ">", 0.0)
    report.check("nogo.ud_converse", "fraction of dependent families reported infeasible",
                 c[:, 0].mean(), ">=", 1.0)
    report.check("nogo.ud_null_vector", "max null-vector residual", c[:, 1].max(), "<",
                 tol("nogo.ud_null_vector", 1e-8))
    povm = nogo.build_ud_povm([[1, 0], np.array([1, 1]) / np.sqrt(2)])
    report.check("nogo.ud_canonical_lambda", "|lambda - 1/(2 + sqrt2)| for {|0>, |+>}",
                 abs(povm.lambdas[0] - 1 / (2 + np.sqrt(2))), "<", tol("nogo.ud_canonical_lambda", 1e-10))


def run_signal(cfg: dict, tol: _Tolerances, report: RunReport) -> None:
    p, seed = cfg["params"], cfg["seed"]
    sc = signaling.canonical_scenario()
    r = 2 ** -0.5
    oracle = signaling.CloneOracle([[1, 0], [0, 1], [r, r]], p["success_prob"], p["off_set_policy"])
    p0, p1, dist = signaling.signaling_gap(sc, oracle)
    report.check("signaling.bob_state", "trace distance of Bob's state across Alice's choices",
                 dist, "<", tol("signaling.bob_state", 1e-12))
    if p["success_prob"] == 0.5 and p["off_set_policy"] == "zero":
        report.check("signaling.gap_p0", "|P0 - 0.5|", abs(p0 - 0.5), "<", tol("signaling.gap_p0", 1e-12))
        report.check("signaling.gap_p1", "|P1 - 0.25|", abs(p1 - 0.25), "<", tol("signaling.gap_p1", 1e-12))
    rows = []
    for k, reps in enumerate(p["repetitions"]):
        err = signaling.decode_bit(sc, oracle, reps, [seed, STREAMS["signal.decode"], k],
                                   trials=p["trials"], workers=cfg["workers"])
        exact = signaling.exact_decode_error(p0, p1, reps)
        rows.append([reps, err, exact, signaling.chernoff_bound(p0, p1, reps)])
        if reps == 100:
            report.check("signaling.decode_r100", "empirical decode error at R = 100", err, "<", 0.01)
    report.table("decode", ["R", "empirical_error", "exact_error", "chernoff_bound"], rows)

    def restoration(i):
        rng = sub_rng(seed, "signal.restoration", i)
        ch = channels.random_channel(2, 2, int(rng.integers(1, 5)), rng)
        povm = signaling.random_povm(2, int(rng.integers(2, 5)), rng)
        a = signaling.bob_statistics(sc, 0, ch, povm)
        b = signaling.bob_statistics(sc, 1, ch, povm)
        return 0.5 * np.abs(a - b).sum()

    gaps = ordered_map(restoration, range(p["bob_povms"]), cfg["workers"])
    report.check("signaling.no_signaling_restoration", "max total-variation gap with a CPTNI channel",
                 max(gaps), "<", tol("signaling.no_signaling_restoration", 1e-10))
    report.table("gap", ["quantity", "value"], [["P0", p0], ["P1", p1]])


def run_grover(cfg: dict, tol: _Tolerances, report: RunReport) -> None:
    p = cfg["params"]
    inst = grover.GroverInstance.of_size(int(p["N"]))
    size = inst.size
    bound = grover.round_bound(size)
    super_trace = grover.super_grover_run(inst, 0.25)
    rows = [[r, pr, r] for r, pr in zip(super_trace.rounds, super_trace.probabilities)]
    report.table("super", ["round", "p", "queries"], rows)
    std = grover.fixed_rounds(inst, int(p["standard_rounds"]), "standard")
    report.table("standard", ["round", "p", "queries"],
                 [[r, pr, r] for r, pr in zip(std.rounds, std.probabilities)])
    report.check("grover.round_bound", "first round with p >= 1/4 (must not exceed the bound)",
                 super_trace.rounds[-1], "<=", bound)
    closed = max(abs(pr - grover.standard_success(size, r)) for r, pr in zip(std.rounds, std.probabilities))
    report.check("grover.standard_closed_form", "max |p_r - sin^2((2r+1) theta)|", closed, "<",
                 tol("grover.standard_closed_form", 1e-10))
    report.check("grover.query_accounting", "oracle queries minus rounds",
                 abs(std.queries - int(p["standard_rounds"])) + abs(super_trace.queries - super_trace.rounds[-1]),
                 "<=", 0)
    dev = 0.0
    growth = 0.0
    for n in range(2, int(p["crosscheck_max_n"]) + 1):
        sub_inst = grover.GroverInstance(n, (2 ** n) // 3)
        rounds = grover.round_bound(2 ** n) + 2
        sv = grover.fixed_rounds(sub_inst, rounds, "super", mode="statevector")
        tw = grover.fixed_rounds(sub_inst, rounds, "super", mode="subspace")
        a = tw.amplitudes[0]
        for r in range(rounds + 1):
            dev = max(dev, abs(sv.amplitudes[r] - tw.amplitudes[r]), abs(sv.amplitudes[r] - a))
            pr = abs(a) ** 2
            if pr <= 0.25:
                growth = max(growth, 4 * pr - grover.probability_step(pr))
            a = grover.overlap_recursion_step(a)
    report.check("grover.recursion_fidelity", "max |a_r| deviation: statevector vs subspace vs recursion",
                 dev, "<", tol("grover.recursion_fidelity", 1e-9))
    report.check("grover.growth_bound", "max violation of p_{r+1} >= 4 p_r for p_r <= 1/4",
                 growth, "<=", tol("grover.growth_bound", 1e-12))
    cmp = grover.query_comparison(inst)
    report.table("comparison", ["quantity", "value"], [
        ["N", size], ["standard_queries_to_half", cmp.standard_to_half],
        ["standard_queries_to_0.99", grover.standard_queries_to(inst, 0.99)],
        ["super_queries_to_quarter", cmp.super_to_quarter], ["super_queries_to_half", cmp.super_to_half],
        ["round_bound", cmp.round_bound]])


def run_circle(cfg: dict, tol: _Tolerances, report: RunReport) -> None:
    p, seed = cfg["params"], cfg["seed"]
    c = float(p["promise"])
    chi = np.array([1, 0], dtype=complex)
    ch = superposer.build_reference_protocol(chi, superposer.OverlapPromise(c, 1.0),
                                             superposer.SuperpositionWeights.balanced())
    points = geometry.success_set_scan(ch, chi, grid=tuple(p["grid"]))
    report.check("geometry.success_nonempty", "number of successful grid points", len(points), ">", 0)
    constraint, resid = geometry.fit_circle_constraint(points)
    expected = geometry.fixed_overlap_circle(chi, c)
    report.check("geometry.circle_fit", "max fit residual on the success set", resid, "<",
                 tol("geometry.circle_fit", 1e-6))
    report.check("geometry.circle_match", "max |fitted - expected| constraint coefficient",
                 np.abs(np.array(constraint) - np.array(expected)).max(), "<", tol("geometry.circle_match", 1e-6))
    rng = sub_rng(seed, "circle.haar")
    haar = []
    for _ in range(int(p["haar_points"])):
        v = hilbert.random_state(2, rng)
        v = v * np.exp(-1j * np.angle(v[0]))
        x = 2 * np.arccos(min(1.0, abs(v[0])))
        y = float(np.mod(-np.angle(v[1]), 2 * np.pi)) if abs(v[1]) > 0 else 0.0
        haar.append((x, y))
    _, haar_resid = geometry.fit_circle_constraint(haar)
    report.check("geometry.haar_rejected", "max fit residual on Haar-random points", haar_resid, ">", 0.1)
    res = constraint.residuals(points)
    report.table("points", ["x", "y", "residual"], [[pt.x, pt.y, r] for pt, r in zip(points, res)])
    report.table("constraint", ["A", "B", "C", "D", "max_residual"], [[*constraint, resid]])


RUNNERS = {"superpose": run_superpose, "ldli": run_ldli, "ud": run_ud,
           "signal": run_signal, "grover": run_grover, "circle": run_circle}


def run(config: dict) -> RunReport:
    cfg = validate_config(config)
    report = RunReport(cfg["experiment"], {k: cfg[k] for k in ("experiment", "seed", "params", "tolerances")})
    start = time.perf_counter()
    RUNNERS[cfg["experiment"]](cfg, _Tolerances(cfg["tolerances"]), report)
    report.timings["wall_seconds"] = time.perf_counter() - start
    return report
