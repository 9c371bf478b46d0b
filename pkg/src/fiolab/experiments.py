"""Experiment harness: decay-slope studies, domination and sparse studies, and
hypothesis audits, all emitting machine-readable reports.

A single flat config drives every experiment; reports embed the config, its
hash and module versions, and identical config + seed reproduces the report
byte for byte apart from the timestamp.  Reports are written atomically
(temp file + rename).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np
import scipy

from . import __version__
from .decomposition import (
    LPPartition,
    build_angular_net,
    eta_partition_deviation,
    lp_partition_audit,
    psi0_profile,
    verify_net,
)
from .engine import (
    apply_Tj,
    apply_TjB_localized,
    grid_j_max,
    kernel_K0,
    make_fio,
    sector_concentration,
    split_T_AB,
)
from .exponents import (
    discrepancy_report,
    dual_exponent,
    m_rho,
    pointwise_threshold,
    tja_exponent,
    tjb_exponent,
)
from .grid import DyadicCube, SampledFunction, cube_average, fourier_coefficients, make_grid
from .maximal import (
    build_sparse_pointwise,
    form_domination_constants,
    maximal_at,
    verify_sparse,
)
from .symbols import (
    ball_volume,
    default_probes,
    estimate_amplitude_seminorm,
    euler_residual,
    homogeneity_residual,
    make_amplitude,
    make_phase,
    measure_condition_constant,
    nondegeneracy_min,
    unit_sphere_probes,
)

__all__ = [
    "ExperimentConfig",
    "DecayReport",
    "load_config",
    "config_hash",
    "random_bandlimited",
    "bump_function",
    "build_operator",
    "fit_slope",
    "run_decay",
    "run_domination",
    "run_sparse",
    "run_audit",
    "write_report",
]

DECAY_QUANTITIES = ("tjb-localized", "tjb-maximal", "tja", "k0", "concentration")


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat experiment description; every field maps to a config key and flag."""

    experiment: str = "decay"
    quantity: str = "tjb-localized"
    n: int = 2
    N: int = 256
    L: float = 16.0
    amplitude: str = "power-rough"
    m: float = -1.25
    rho: float = 1.0
    amp_seed: int = 0
    phase: str = "halfwave-rough"
    phase_seed: int = 0
    t_low: float = 1.0
    t_high: float = 2.0
    pieces: int = 16
    r: float = 2.0
    s: float = 2.0
    j_min: int = 2
    j_max: int = 4
    probes_per_axis: int = 8
    margin: float = 0.3
    seed: int = 1
    band: float = 0.0  # 0 = half the Nyquist radius
    input_kind: str = "random"  # random | bump
    eta_target: float = 0.5
    out: str = ""

    def validate(self):
        if self.experiment not in ("decay", "domination", "sparse", "audit", "exponents"):
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.experiment == "decay" and self.quantity not in DECAY_QUANTITIES:
            raise ValueError(f"unknown decay quantity {self.quantity!r}")
        if self.j_min > self.j_max:
            raise ValueError("j_min must not exceed j_max")
        return self


def load_config(path) -> ExperimentConfig:
    """Read a flat TOML key/value file into a config."""
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    fields = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(data) - fields
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**data).validate()


def config_hash(cfg: ExperimentConfig) -> str:
    payload = json.dumps(asdict(cfg), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def _json_default(obj):
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def write_report(obj: dict, path) -> None:
    """Atomic JSON write: temp file in the target directory, then rename."""
    path = os.fspath(path)
    payload = json.dumps(obj, indent=2, sort_keys=True, default=_json_default)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _envelope(cfg: ExperimentConfig, kind: str, body: dict) -> dict:
    return {
        "experiment": kind,
        "config": asdict(cfg),
        "config_hash": config_hash(cfg),
        "versions": {"fiolab": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        "timestamp": datetime.now(timezone.utc).isoformat(),
        **body,
    }


# -- seeded inputs ---------------------------------------------------------------


def random_bandlimited(grid, seed: int, band: float) -> SampledFunction:
    """Rough-but-band-limited input: seeded Gaussian spectrum on |xi| <= band."""
    rng = np.random.default_rng(seed)
    fhat = np.zeros(grid.shape, dtype=complex)
    norms = np.linalg.norm(grid.freq_points(), axis=-1).reshape(grid.shape)
    mask = norms <= band
    count = int(mask.sum())
    fhat[mask] = rng.normal(size=count) + 1j * rng.normal(size=count)
    return SampledFunction(grid, np.fft.ifftn(fhat) * grid.size)


def bump_function(grid, center=None, width=None) -> SampledFunction:
    """Mollified indicator bump centred in the cell."""
    if center is None:
        center = np.full(grid.dim, grid.period / 2)
    if width is None:
        width = grid.period / 8
    pts = grid.spatial_points()
    diff = (pts - np.asarray(center) + grid.period / 2) % grid.period - grid.period / 2
    vals = psi0_profile(np.linalg.norm(diff, axis=-1) / (width / 2))
    return SampledFunction(grid, vals.reshape(grid.shape))


def test_function(cfg: ExperimentConfig, grid, seed: int) -> SampledFunction:
    band = cfg.band if cfg.band > 0 else grid.nyquist / 2
    if cfg.input_kind == "bump":
        return bump_function(grid)
    return random_bandlimited(grid, seed, band)


def build_operator(cfg: ExperimentConfig):
    grid = make_grid(cfg.n, cfg.N, cfg.L)
    phase = make_phase(cfg.phase, cfg.n, cfg.L, seed=cfg.phase_seed, pieces=cfg.pieces,
                       t_low=cfg.t_low, t_high=cfg.t_high)
    amp = make_amplitude(cfg.amplitude, cfg.n, m=cfg.m, rho=cfg.rho, period=cfg.L,
                         seed=cfg.amp_seed, pieces=cfg.pieces)
    op = make_fio(amp, phase, grid)
    return grid, op, LPPartition()


def apply_fio_lattice(op, f: SampledFunction, chunk: int = 256) -> np.ndarray:
    """Operator values on the whole lattice, chunk-vectorised over x."""
    g = op.grid
    fhat = fourier_coefficients(f).ravel()
    xi = g.freq_points()
    X = g.spatial_points()
    out = np.empty(g.size, dtype=complex)
    scale = 1.0 / g.period**g.dim
    for start in range(0, g.size, chunk):
        xs = X[start:start + chunk][:, None, :]
        amp = op.amplitude.eval(xs, xi[None, :, :])
        ph = op.phase.eval(xs, xi[None, :, :])
        vals = amp * np.exp(1j * ph)
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite symbol values on the lattice")
        out[start:start + chunk] = (vals * fhat[None, :]).sum(axis=-1) * scale
    return out.reshape(g.shape)


# -- slope fits ------------------------------------------------------------------


def fit_slope(js, values) -> dict:
    """Least-squares fit of log2(value) against j, with max |residual|."""
    js = np.asarray(js, dtype=float)
    values = np.asarray(values, dtype=float)
    live = values > 0
    if live.sum() < 2:
        return {"slope": 0.0, "intercept": 0.0, "residual": 0.0, "degenerate": True}
    logs = np.log2(values[live])
    slope, intercept = np.polyfit(js[live], logs, 1)
    resid = float(np.max(np.abs(logs - (slope * js[live] + intercept))))
    return {"slope": float(slope), "intercept": float(intercept),
            "residual": resid, "degenerate": False}


@dataclass(frozen=True)
class DecayReport:
    """Per-level measurements with fitted slope vs the predicted exponent."""

    quantity: str
    js: list
    values: list
    slope: float
    predicted: float
    margin: float
    residual: float
    degenerate: bool
    passed: bool

    def to_obj(self) -> dict:
        return asdict(self)


def _probes_in_cube(grid, Q: DyadicCube, per_axis: int) -> np.ndarray:
    lo = np.array(Q.corner_index) * Q.points_per_axis
    stride = max(1, Q.points_per_axis // per_axis)
    ax = [lo[k] + np.arange(0, Q.points_per_axis, stride)[:per_axis] for k in range(grid.dim)]
    mesh = np.meshgrid(*ax, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1).astype(int)


def run_decay(cfg: ExperimentConfig) -> dict:
    """Slope study for one decay quantity; passes when the fitted slope is at
    most predicted + margin."""
    cfg.validate()
    grid, op, part = build_operator(cfg)
    js = list(range(cfg.j_min, cfg.j_max + 1))
    f = test_function(cfg, grid, cfg.seed)
    values = []
    extra = {}

    if cfg.quantity == "k0":
        probes = grid.probe_indices(min(cfg.probes_per_axis, 4))
        base = kernel_K0(op, probes)
        zn = grid.signed_offset_norms()
        for ell in js:
            if 2.0 ** (ell + 2) > grid.period / 2:
                raise ValueError(f"ell={ell} too large for the period cell")
            zpsi = part.psi_radial(ell, zn)
            values.append(float(np.max(np.abs(base.values * zpsi[None]))))
        predicted = -(cfg.n + 0.5)
    elif cfg.quantity == "tjb-localized":
        level = max(0, int(math.floor(math.log2(grid.period / (3 * op.split_radius)))))
        Q = DyadicCube(grid, level, (0,) * cfg.n)
        probes = _probes_in_cube(grid, Q, cfg.probes_per_axis)
        avg = cube_average(f, cfg.r, Q)
        for j in js:
            vals = apply_TjB_localized(op, part, j, f, Q, probes)
            values.append(float(np.max(np.abs(vals)) / avg))
        predicted = float(tjb_exponent(cfg.n, cfg.rho, cfg.r, cfg.m))
        extra["cube_level"] = level
        extra["cube_average"] = avg
    elif cfg.quantity == "tjb-maximal":
        probes = grid.probe_indices(cfg.probes_per_axis)
        Mr = maximal_at(f, cfg.r, probes)
        for j in js:
            _, B = split_T_AB(op, part, j, f, probes)
            values.append(float(np.max(np.abs(B) / Mr)))
        predicted = float(tjb_exponent(cfg.n, cfg.rho, cfg.r, cfg.m))
    elif cfg.quantity == "tja":
        probes = grid.probe_indices(cfg.probes_per_axis)
        for j in js:
            A, _ = split_T_AB(op, part, j, f, probes)
            values.append(float(np.max(np.abs(A))))
        predicted = float(tja_exponent(cfg.n, cfg.rho, cfg.m, cfg.n + 1))
    elif cfg.quantity == "concentration":
        # Weighted sector-kernel sup with both gradient-shift variants (full
        # rotated vector vs transverse components only).  The g^(n+1) weight
        # reaches ~2^(2 j rho (n+1)) at the edge of the B-region, so at desk
        # scale the slope is dominated by that constant; the unweighted sup
        # carries the same predicted exponent with O(1) constants.
        probes = grid.probe_indices(min(cfg.probes_per_axis, 4))
        prime_values = []
        plain_values = []
        for j in js:
            net = build_angular_net(cfg.n, j, cfg.rho)
            best_f = best_p = best_0 = 0.0
            for nu in range(0, net.count, max(1, net.count // 3)):
                rep = sector_concentration(op, net, j, nu, probes)
                best_f = max(best_f, rep["full"])
                best_p = max(best_p, rep["prime"])
                best_0 = max(best_0, sector_concentration(op, net, j, nu, probes,
                                                          weight_power=0)["full"])
            values.append(best_f)
            prime_values.append(best_p)
            plain_values.append(best_0)
        predicted = float(cfg.m + cfg.n * (1 - cfg.rho) + (cfg.n + 1) * cfg.rho / 2)
        extra["prime_values"] = prime_values
        extra["unweighted_values"] = plain_values
        extra["unweighted_slope"] = fit_slope(js, plain_values)["slope"]
    else:  # pragma: no cover - guarded by validate
        raise ValueError(cfg.quantity)

    fit = fit_slope(js, values)
    passed = (not fit["degenerate"]) and fit["slope"] <= predicted + cfg.margin
    rep = DecayReport(
        quantity=cfg.quantity, js=js, values=values, slope=fit["slope"],
        predicted=predicted, margin=cfg.margin, residual=fit["residual"],
        degenerate=fit["degenerate"], passed=passed,
    )
    body = {"report": rep.to_obj(), "passed": passed, "expected_fail": False}
    body.update(extra)
    out = _envelope(cfg, "decay", body)
    if cfg.out:
        write_report(out, cfg.out)
    return out


def run_domination(cfg: ExperimentConfig) -> dict:
    """Pointwise maximal-bound study: C = max probe ratio |T f| / M_r f.

    Reports C for two seeds and the doubled input (the ratio is scale
    invariant), per-level sups with a geometric tail estimate, and C growth
    over truncation levels.  m at or above the threshold marks the run as an
    expected failure: C is then monitored rather than required to be stable.
    """
    cfg.validate()
    grid, op, part = build_operator(cfg)
    thr = pointwise_threshold(cfg.n, cfg.rho, cfg.r)
    expected_fail = Fraction(cfg.m) >= thr
    probes = grid.probe_indices(cfg.probes_per_axis)
    J = grid_j_max(grid)

    def one(seed, scale):
        f = test_function(cfg, grid, seed).scaled(scale)
        Mr = maximal_at(f, cfg.r, probes)
        live = Mr > 0
        total = np.zeros(len(probes), dtype=complex)
        sups = []
        prefix_C = []
        flagged = bool(np.any(~live))
        for j in range(J + 1):
            vals = apply_Tj(op, part, j, f, probes)
            total += vals
            sups.append(float(np.max(np.abs(vals))))
            prefix_C.append(float(np.max(np.abs(total[live]) / Mr[live])))
        if np.any(~live & (np.abs(total) > 0)):
            flagged = True
        fit = fit_slope(list(range(1, J + 1)), sups[1:])
        if not fit["degenerate"] and fit["slope"] < 0:
            ratio = 2.0 ** fit["slope"]
            tail = 2.0 ** (fit["intercept"] + fit["slope"] * (J + 1)) / (1 - ratio)
        else:
            tail = math.inf
        return {"C": prefix_C[-1], "per_level_sup": sups, "prefix_C": prefix_C,
                "tail_estimate": tail, "slope": fit["slope"],
                "maximal_zero_flag": flagged}

    runs = {
        "seed_a": one(cfg.seed, 1.0),
        "seed_b": one(cfg.seed + 1, 1.0),
        "seed_a_doubled": one(cfg.seed, 2.0),
    }
    Ca, Cb = runs["seed_a"]["C"], runs["seed_b"]["C"]
    stability = max(Ca, Cb) / min(Ca, Cb)
    scale_dev = abs(runs["seed_a_doubled"]["C"] - Ca) / Ca
    growth = runs["seed_a"]["prefix_C"][-1] / max(runs["seed_a"]["prefix_C"][0], 1e-300)
    checks = {
        "C_finite": bool(np.isfinite(Ca) and np.isfinite(Cb)),
        "seed_stability_factor": stability,
        "seed_stable_within_2": bool(stability <= 2.0),
        "rescale_relative_deviation": scale_dev,
        "rescale_exact_1e10": bool(scale_dev <= 1e-10),
        "threshold": float(thr),
        "growth_factor_over_levels": growth,
    }
    passed = expected_fail or (
        checks["C_finite"] and checks["seed_stable_within_2"] and checks["rescale_exact_1e10"]
    )
    out = _envelope(cfg, "domination", {
        "runs": runs, "checks": checks, "passed": bool(passed),
        "expected_fail": bool(expected_fail),
    })
    if cfg.out:
        write_report(out, cfg.out)
    return out


def run_sparse(cfg: ExperimentConfig) -> dict:
    """Sparse construction study: build Tf on the lattice, construct a sparse
    collection, and verify pointwise and form domination."""
    cfg.validate()
    grid, op, part = build_operator(cfg)
    admissible = m_rho(cfg.n, cfg.rho, cfg.r, cfg.s)
    expected_fail = Fraction(cfg.m) >= admissible.value
    s_dual = dual_exponent(cfg.s)

    def one(seed):
        f = test_function(cfg, grid, seed)
        Tf = apply_fio_lattice(op, f)
        S, C_pt = build_sparse_pointwise(Tf, f, cfg.r, cfg.eta_target)
        gfun = random_bandlimited(grid, seed + 7919, cfg.band if cfg.band > 0 else grid.nyquist / 2)
        C_form = form_domination_constants(Tf, f, gfun, cfg.r, s_dual, S)
        return {
            "eta": S.eta,
            "C_pointwise": C_pt,
            "C_form": C_form["raw"],
            "C_form_majorant": C_form["absolute"],
            "verified": bool(verify_sparse(S)),
            "cube_count": len(S.entries),
            "collection": S.to_json_obj(),
        }

    runs = {"seed_a": one(cfg.seed), "seed_b": one(cfg.seed + 1)}
    a, b = runs["seed_a"], runs["seed_b"]
    stab_pt = max(a["C_pointwise"], b["C_pointwise"]) / min(a["C_pointwise"], b["C_pointwise"])
    # the raw pairing ratio carries random sign cancellation; its
    # cancellation-free majorant is the seed-stable certified constant
    stab_form = (max(a["C_form_majorant"], b["C_form_majorant"])
                 / min(a["C_form_majorant"], b["C_form_majorant"]))
    checks = {
        "eta_target": cfg.eta_target,
        "eta_ok": bool(min(a["eta"], b["eta"]) >= cfg.eta_target),
        "verified": bool(a["verified"] and b["verified"]),
        "pointwise_stability_factor": stab_pt,
        "form_stability_factor": stab_form,
        "stable_within_2": bool(stab_pt <= 2.0 and stab_form <= 2.0),
        "threshold": float(admissible.value),
        "threshold_region": admissible.region,
        "s_dual": float(s_dual) if s_dual != math.inf else math.inf,
    }
    passed = expected_fail or (
        checks["verified"] and checks["eta_ok"] and checks["stable_within_2"]
        and np.isfinite(a["C_pointwise"]) and np.isfinite(a["C_form"])
        and np.isfinite(a["C_form_majorant"])
    )
    out = _envelope(cfg, "sparse", {
        "runs": runs, "checks": checks, "passed": bool(passed),
        "expected_fail": bool(expected_fail),
    })
    if cfg.out:
        write_report(out, cfg.out)
    return out


def run_audit(cfg: ExperimentConfig, phase_override=None) -> dict:
    """Hypothesis audits: one JSON record {audit, probes, value, tolerance,
    pass} per check; failures are report entries, never exceptions."""
    cfg.validate()
    records = []

    def record(name, probes, value, tol, ok):
        records.append({"audit": name, "probes": int(probes), "value": float(value),
                        "tolerance": float(tol), "pass": bool(ok)})

    phase = phase_override if phase_override is not None else make_phase(
        cfg.phase, cfg.n, cfg.L, seed=cfg.phase_seed, pieces=cfg.pieces,
        t_low=cfg.t_low, t_high=cfg.t_high)
    probes = default_probes(cfg.n, cfg.L)

    res = homogeneity_residual(phase, probes.x, probes.xi)
    record("phase-homogeneity", probes.x.shape[0] * probes.xi.shape[0], res, 1e-8, res <= 1e-8)

    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    count = 0
    while count < 300:
        x = rng.random(cfg.n) * cfg.L
        xi = rng.normal(size=cfg.n)
        if np.linalg.norm(xi) < 0.3:
            continue
        try:
            r1, r2 = euler_residual(phase, x, xi)
        except ValueError:
            r1 = r2 = math.inf
        worst = max(worst, r1, r2)
        count += 1
    record("euler-identities", count, worst, 1e-5, worst <= 1e-5)

    centers = (np.arange(cfg.pieces) + 0.5) * cfg.L / cfg.pieces
    mesh = np.meshgrid(*([centers] * cfg.n), indexing="ij")
    x_probes = np.stack([m.ravel() for m in mesh], axis=-1)
    claimed = phase.nondegeneracy_floor
    try:
        floor = nondegeneracy_min(phase, x_probes, unit_sphere_probes(cfg.n, 16))
        ok = claimed is None or floor >= claimed - 1e-3
    except ValueError:
        floor, ok = math.nan, False
    record("nondegeneracy-floor", len(x_probes) * 16, floor if floor == floor else -1.0,
           1e-3, ok)

    # Measure condition: the constant-coefficient archetype gives an exact
    # disc/interval sublevel set, checked against 1/vol(unit ball) at 10%.
    mgrid = make_grid(cfg.n, min(cfg.N, 256), cfg.L)
    halfwave = make_phase("halfwave", cfg.n, cfg.L)
    xi_pr = unit_sphere_probes(cfg.n, 4)
    y_pr = np.full((1, cfg.n), cfg.L / 2)
    cval = measure_condition_constant(halfwave, mgrid, [cfg.L / 8, cfg.L / 4], y_pr, xi_pr)
    target = 1.0 / ball_volume(cfg.n)
    record("measure-condition-halfwave", mgrid.size * len(xi_pr), cval, 0.1 * target,
           abs(cval - target) <= 0.1 * target)
    if phase.measure_constant is not None and phase is not halfwave:
        cval2 = measure_condition_constant(phase, mgrid, [cfg.L / 8, cfg.L / 4], y_pr, xi_pr)
        record("measure-condition-config", mgrid.size * len(xi_pr), cval2,
               0.7 * phase.measure_constant, cval2 >= 0.3 * phase.measure_constant)

    part = LPPartition()
    rng2 = np.random.default_rng(cfg.seed + 1)
    J = max(cfg.j_max, 2)
    xi = rng2.normal(size=(4096, cfg.n))
    norms = np.linalg.norm(xi, axis=-1)
    xi *= (rng2.random(4096) * 2.0 ** (J - 1) / norms)[:, None]
    partition_records = lp_partition_audit(part, J, xi)
    dev = max(rec["max_deviation_from_one"] for rec in partition_records)
    record("lp-partition-of-unity", len(xi), dev, 1e-12, dev <= 1e-12)

    worst_eta = 0.0
    worst_net = {"separation": True, "cover": True, "count": True}
    dirs = rng2.normal(size=(10_000, cfg.n))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    for j in range(max(1, cfg.j_min), cfg.j_max + 1):
        net = build_angular_net(cfg.n, j, cfg.rho)
        worst_eta = max(worst_eta, eta_partition_deviation(net, dirs))
        rep = verify_net(net, seed=cfg.seed)
        worst_net["separation"] &= rep["separation_ok"]
        worst_net["cover"] &= rep["cover_ok"]
        worst_net["count"] &= rep["count_ok"]
    record("eta-partition-of-unity", len(dirs), worst_eta, 1e-12, worst_eta <= 1e-12)
    record("net-separation", 0, 1.0 if worst_net["separation"] else 0.0, 1.0,
           worst_net["separation"])
    record("net-covering", 0, 1.0 if worst_net["cover"] else 0.0, 1.0, worst_net["cover"])
    record("net-count-bound", 0, 1.0 if worst_net["count"] else 0.0, 1.0, worst_net["count"])

    amp = make_amplitude(cfg.amplitude, cfg.n, m=cfg.m, rho=cfg.rho, period=cfg.L,
                         seed=cfg.amp_seed, pieces=cfg.pieces)
    c0 = estimate_amplitude_seminorm(amp, (0,) * cfg.n, probes)
    weight = (1.0 + np.sum(probes.xi**2, axis=-1)) ** (-amp.order / 2.0)
    sup_direct = float(np.max(weight[None, :] * np.abs(amp.eval(probes.x[:, None, :],
                                                               probes.xi[None, :, :]))))
    record("amplitude-c0-estimate", probes.x.shape[0] * probes.xi.shape[0],
           abs(c0 - sup_direct), 1e-6, abs(c0 - sup_direct) <= 1e-6)

    # Transverse-derivative growth of the sector symbols, reported under both
    # normalisations: the level-dependent bound 2^(m j + rho|alpha'| j / 2)
    # (used for the pass flag) and the level-free variant 2^(m j) 2^(rho|alpha'|/2)
    # as printed in some statements of the bound (flagged, not resolved).
    b_growth = _b_derivative_slopes(cfg, phase) if cfg.n == 2 else None
    if b_growth is not None:
        bound_with_j = cfg.m + cfg.rho / 2.0
        record("b-derivative-growth-with-j", b_growth["points"], b_growth["slope"],
               bound_with_j + 0.3, b_growth["slope"] <= bound_with_j + 0.3)
        record("b-derivative-growth-printed", b_growth["points"], b_growth["slope"],
               cfg.m + 0.3, b_growth["slope"] <= cfg.m + 0.3)

    passed = all(r["pass"] for r in records if r["audit"] != "b-derivative-growth-printed")
    out = _envelope(cfg, "audit", {"records": records, "passed": bool(passed),
                                   "partition_audit": partition_records,
                                   "expected_fail": False})
    if cfg.out:
        write_report(out, cfg.out)
    return out


def _b_derivative_slopes(cfg: ExperimentConfig, phase) -> dict:
    """Fitted growth of max |transverse derivative of b| over levels (2-d)."""
    from .decomposition import b_symbol

    amp = make_amplitude(cfg.amplitude, 2, m=cfg.m, rho=cfg.rho, period=cfg.L,
                         seed=cfg.amp_seed, pieces=cfg.pieces)
    x = np.array([0.3 * cfg.L, 0.6 * cfg.L])
    js = [3, 5, 7]
    maxima = []
    points = 0
    for j in js:
        net = build_angular_net(2, j, cfg.rho)
        nu = 0
        b = b_symbol(amp, phase, net, j, nu)
        e2 = net.rotation(nu).T[:, 1]
        delta = net.delta
        support_radius = 2.0 ** (j * (1.0 - cfg.rho))
        offsets = np.linspace(-0.9 * delta, 0.9 * delta, 15)
        dirs = net.vectors[nu][None, :] + offsets[:, None] * e2[None, :]
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        radii = support_radius * np.array([0.6, 1.0, 1.5])
        pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, 2)
        h = 1e-3 * delta * support_radius
        deriv = np.abs(b(x, pts + h * e2) - b(x, pts - h * e2)) / (2 * h)
        maxima.append(float(np.max(deriv)))
        points += len(pts)
    fit = fit_slope(js, maxima)
    if fit["degenerate"]:
        return None
    return {"slope": fit["slope"], "points": points}


def run_exponents(cfg: ExperimentConfig, grid_points: int = 21, surface_out: str = "") -> dict:
    """Threshold-surface emission plus the documented discrepancy report."""
    from .exponents import figure_surface_rows

    rows = list(figure_surface_rows(cfg.n, cfg.rho, grid_points))
    if surface_out:
        with open(surface_out, "w") as fh:
            fh.write("inv_r,inv_s_dual,m_rho,region\n")
            for rr, ssd, val, tag in rows:
                fh.write(f"{float(rr)!r},{float(ssd)!r},{float(val)!r},{tag}\n")
    rep = discrepancy_report(cfg.n, cfg.rho)
    out = _envelope(cfg, "exponents", {
        "rows": len(rows),
        "surface_out": surface_out,
        "discrepancies": {k: (float(v) if isinstance(v, Fraction) else v)
                          for k, v in rep.items()},
        "passed": True,
        "expected_fail": False,
    })
    if cfg.out:
        write_report(out, cfg.out)
    return out
