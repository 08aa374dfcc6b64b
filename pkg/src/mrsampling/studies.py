"""Experiment configuration and the reproduction studies behind the command line.

Every study is a plain function taking an :class:`ExperimentConfig` and
returning a :class:`RunReport`; files are written only when ``config.out``
is set.  Reports contain no timings so that identical configurations give
byte-identical output (wall-clock time is written to ``timing.json``).
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import integrate as sci_integrate

from . import fileio
from .duals import DualSpec, solve_dual_mask, verify_biorthogonality
from .expressions import Expression, ExpressionError
from .geometry import BoxDomain, covering_radius
from .integration import basis_weights, integrate, polynomial_exactness_check
from .reconstruction import DivergenceError, assemble_pack, contraction_estimate, log_residual_fit, restore
from .refinable import Mask, MaskError, gp_mask
from .sampling import SamplingSet
from .spaces import Basis, CanonicalDual, CompactDual, build_interval_basis, condition_number, gramian, tensor_basis

log = logging.getLogger(__name__)

COMMANDS = ("mask", "dualmask", "gramian", "restore", "integrate", "condtable", "decay", "gpstudy")

# kappa_2 for n = 3 on (0, 1) as published, used only as a stretch comparison
REFERENCE_CONDITION_NUMBERS = {3: 46.40, 4: 26.06, 5: 20.53, 6: 18.68, 7: 18.00, 8: 17.73, 20: 17.49}


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration (exit code 2)."""


class DensityError(RuntimeError):
    """Node set fails the density certificate (exit code 3)."""

    def __init__(self, message: str, certificate: dict | None = None):
        super().__init__(message)
        self.certificate = certificate


class StudyCheckError(RuntimeError):
    """A study's built-in assertion failed (exit code 1)."""


# --- configuration -----------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Resolved settings of one run; every field is echoed in the report.

    ``nodes`` is either a node count (random nodes drawn with ``seed`` in
    ``layout`` ``uniform`` or ``jitter``) or the path of a samples CSV.
    ``delta`` requests a covering radius: random sets are redrawn until they
    meet it and supplied sets must certify against it unless
    ``allow_sparse`` is set.
    """

    command: str
    n: int = 3
    h: object = None
    mask: str | None = None
    level: int = 0
    domain: str = "0,4"
    dual: str = "canonical"
    dual_vanishing: int | None = None
    dual_degree: int | None = None
    psi: str = "voronoi"
    nodes: str = "7"
    layout: str = "uniform"
    snap: int | None = None
    seed: int = 0
    delta: float | None = None
    allow_sparse: bool = False
    tau: float | None = None
    nmax: int = 100_000
    tol: float | None = 1e-10
    f: str | None = None
    reference: float | None = None
    cascade_level: int = 10
    h_list: str = "3,4,5,6,7,8,20"
    j_list: str = "3,4,5,6,7"
    oversample: float = 2.0
    checkpoints: str = "0,50,100,300,2000"
    moments: int | None = None
    pairs: int = 0
    out: str | None = None

    def to_dict(self) -> dict:
        out = {}
        for fld in fields(self):
            v = getattr(self, fld.name)
            out[fld.name] = str(v) if isinstance(v, Fraction) else v
        return out

    def to_text(self) -> str:
        lines = []
        for k, v in self.to_dict().items():
            if v is not None:
                lines.append(f"{k} = {str(v).lower() if isinstance(v, bool) else v}")
        return "\n".join(lines) + "\n"


_DEFAULTS = {
    "restore": {"f": None},
    "condtable": {"n": 3, "level": 5, "domain": "0,1"},
    "decay": {"n": 3, "domain": "0,1", "f": "sin(pi*x)", "layout": "jitter", "tol": 1e-13, "nmax": 20_000},
    "gpstudy": {"n": 5, "level": 5, "domain": "0,1", "f": "(x-1/2)^2-0.1", "h_list": "4.1,4.3,4.5,5",
                "nodes": "80", "layout": "jitter", "snap": 15, "tol": 1e-12, "nmax": 20_000},
}


def _parse_h(text):
    if text is None or text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return Fraction(text) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"h: not a number: {text!r}") from None


def _parse_bool(text) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _optional(conv):
    def parse(text):
        if text is None or str(text).strip().lower() in ("", "none"):
            return None
        return conv(text)
    return parse


_PARSERS = {
    "n": int, "h": _parse_h, "level": int, "seed": int, "nmax": int, "cascade_level": int,
    "dual_vanishing": _optional(int), "dual_degree": _optional(int), "snap": _optional(int),
    "delta": _optional(float), "tau": _optional(float), "tol": _optional(float), "reference": _optional(float),
    "oversample": float, "moments": _optional(int), "pairs": int, "allow_sparse": _parse_bool,
}


def make_config(command: str, values: dict | None = None) -> ExperimentConfig:
    """Build a config from string values (config file merged with flags)."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    merged = dict(_DEFAULTS.get(command, {}))
    known = {f.name for f in fields(ExperimentConfig)} - {"command"}
    for key, value in (values or {}).items():
        key = key.replace("-", "_")
        if key == "command":
            if value != command:
                raise ConfigError(f"config is for command {value!r}, not {command!r}")
            continue
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        if value is None:
            continue
        try:
            merged[key] = _PARSERS[key](value) if key in _PARSERS and isinstance(value, str) else value
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    cfg = ExperimentConfig(command, **merged)
    if cfg.h is None:
        cfg.h = cfg.n
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    if cfg.n < 1:
        raise ConfigError("n must be at least 1")
    if cfg.mask is None and not float(cfg.h) > cfg.n - 1:
        raise ConfigError(f"h must exceed n - 1 = {cfg.n - 1}")
    if cfg.level < 0:
        raise ConfigError("level must be nonnegative")
    if cfg.dual not in ("canonical", "compact"):
        raise ConfigError("dual must be 'canonical' or 'compact'")
    if cfg.psi not in ("voronoi", "hat"):
        raise ConfigError("psi must be 'voronoi' or 'hat'")
    if cfg.layout not in ("uniform", "jitter"):
        raise ConfigError("layout must be 'uniform' or 'jitter'")
    if cfg.nmax < 0:
        raise ConfigError("nmax must be nonnegative")
    if cfg.tol is not None and cfg.tol < 0:
        raise ConfigError("tol must be nonnegative")
    if cfg.mask is not None and not Path(cfg.mask).is_file():
        raise ConfigError(f"mask file not found: {cfg.mask}")
    if not cfg.nodes.strip().isdigit() and not Path(cfg.nodes).is_file():
        raise ConfigError(f"nodes must be a count or an existing samples file, got {cfg.nodes!r}")
    domain(cfg)
    if cfg.f is not None:
        try:
            Expression(cfg.f)
        except ExpressionError as exc:
            raise ConfigError(f"f: {exc}") from None


def domain(cfg: ExperimentConfig) -> BoxDomain:
    """``a,b`` for an interval, ``a,b,c,d`` for the rectangle ``[a,b] x [c,d]``."""
    try:
        v = [float(s) for s in cfg.domain.replace(";", ",").split(",")]
        if len(v) == 2:
            return BoxDomain.interval(*v)
        if len(v) == 4:
            return BoxDomain(((v[0], v[1]), (v[2], v[3])))
    except ValueError as exc:
        raise ConfigError(f"domain: {exc}") from None
    raise ConfigError(f"domain must be 'a,b' or 'a,b,c,d', got {cfg.domain!r}")


def _number_list(text: str, conv=float) -> list:
    try:
        return [conv(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"not a list of numbers: {text!r}") from None


# --- building blocks ---------------------------------------------------------


def primal_mask(cfg: ExperimentConfig, h=None) -> Mask:
    if cfg.mask is not None:
        try:
            return fileio.read_mask(cfg.mask)
        except (ValueError, MaskError) as exc:
            raise ConfigError(f"mask file: {exc}") from None
    try:
        return gp_mask(cfg.n, cfg.h if h is None else h)
    except MaskError as exc:
        raise ConfigError(str(exc)) from None


def make_basis(cfg: ExperimentConfig, mask: Mask | None = None, level: int | None = None) -> Basis:
    mask = primal_mask(cfg) if mask is None else mask
    level = cfg.level if level is None else level
    dom = domain(cfg)
    try:
        axes = [build_interval_basis(mask, level, iv, L=cfg.cascade_level) for iv in dom.bounds]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return axes[0] if dom.d == 1 else tensor_basis(*axes)


def make_dual(cfg: ExperimentConfig, basis: Basis, mask: Mask):
    if cfg.dual == "canonical":
        return CanonicalDual(basis)
    if mask.order_n is None:
        raise ConfigError("compact duals need a GP mask (n, h)")
    spec = DualSpec.default(mask.order_n, mask.shape_h, cfg.dual_vanishing, cfg.dual_degree)
    return CompactDual(basis, solve_dual_mask(spec), L=cfg.cascade_level)


def random_nodes(dom: BoxDomain, count: int, rng: np.random.Generator, layout: str = "uniform",
                 max_radius: float | None = None, max_tries: int = 200, snap: int | None = None) -> np.ndarray:
    """Seeded random nodes, redrawn until the covering radius is at most ``max_radius``.

    ``jitter`` places one uniform node in each cell of a regular partition
    (``count`` must be a perfect square in 2-D).  ``snap`` rounds the nodes
    to multiples of ``2^-snap``.
    """
    if count < 1:
        raise ConfigError("node count must be positive")
    res = float(min(dom.lengths)) / 512
    for _ in range(max_tries):
        if layout == "jitter":
            if dom.d == 1:
                u = (np.arange(count) + rng.random(count)) / count
                pts = dom.bounds[0][0] + u[:, None] * dom.lengths[0]
            else:
                m = int(round(np.sqrt(count)))
                if m * m != count:
                    raise ConfigError("2-D jitter needs a square node count")
                I, J = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
                u = (np.column_stack([I.ravel(), J.ravel()]) + rng.random((count, 2))) / m
                pts = np.array([a for a, _ in dom.bounds]) + u * dom.lengths
        else:
            pts = dom.uniform(rng, count)
        if snap is not None:
            step = 2.0**-snap
            lo = np.array([a for a, _ in dom.bounds])
            hi = np.array([b for _, b in dom.bounds])
            pts = np.clip(np.round(pts / step) * step, lo, hi)
        if max_radius is None or covering_radius(pts, dom, res)[0] <= max_radius:
            return pts[:, 0] if dom.d == 1 else pts
    raise DensityError(f"no {count}-node set with covering radius <= {max_radius} in {max_tries} draws")


def load_nodes(cfg: ExperimentConfig, dom: BoxDomain, rng: np.random.Generator):
    """Return ``(nodes, values)`` from the config; ``values`` may be ``None``."""
    spec = cfg.nodes.strip()
    if spec.isdigit():
        return random_nodes(dom, int(spec), rng, cfg.layout, cfg.delta, snap=cfg.snap), None
    try:
        nodes, values = fileio.read_samples(spec, dom.d)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"samples file: {exc}") from None
    return (nodes[:, 0] if dom.d == 1 else nodes), values


def sampling_set(cfg: ExperimentConfig, nodes, dom: BoxDomain) -> tuple[SamplingSet, dict]:
    try:
        sset = SamplingSet(nodes, dom)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cert = sset.certificate(cfg.delta) if cfg.delta is not None else sset.certificate()
    info = cert.to_dict()
    log.info("density certificate: %s", json.dumps(info))
    if not cert.passed:
        if not cfg.allow_sparse:
            raise DensityError(f"node set is not dense: covering radius {cert.covering_radius:.4g} > delta {cert.delta:.4g}", info)
        log.warning("density certificate failed; continuing because allow_sparse is set")
        info["override"] = True
    return sset, info


def sample_values(cfg: ExperimentConfig, nodes, file_values):
    if cfg.f is not None:
        return Expression(cfg.f)(nodes)
    if file_values is not None:
        return np.asarray(file_values, dtype=float)
    raise ConfigError("no samples: give f = <expression> or a samples file with a value column")


def _reference_integral(expr: Expression, dom: BoxDomain) -> float:
    if dom.d == 1:
        (a, b), = dom.bounds
        return float(sci_integrate.quad(lambda t: float(expr(np.array([t]))[0]), a, b, epsabs=1e-13, epsrel=1e-12, limit=200)[0])
    (a, b), (c, d) = dom.bounds
    val = sci_integrate.dblquad(lambda yy, xx: float(expr(np.array([[xx, yy]]))[0]), a, b, c, d, epsabs=1e-13, epsrel=1e-13)[0]
    return float(val)


# --- reports -----------------------------------------------------------------


@dataclass
class RunReport:
    config: dict
    certificate: dict | None = None
    results: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    wall_clock: float = 0.0

    def to_json(self) -> str:
        body = {"config": self.config, "certificate": self.certificate, "results": self.results,
                "artifacts": self.artifacts}
        return json.dumps(_jsonable(body), indent=2, sort_keys=True)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float) and not np.isfinite(v):
        return str(v)
    return v


def _outdir(cfg: ExperimentConfig) -> Path | None:
    if cfg.out is None:
        return None
    p = Path(cfg.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def finish(report: RunReport, cfg: ExperimentConfig, start: float) -> RunReport:
    report.wall_clock = time.perf_counter() - start
    out = _outdir(cfg)
    if out is not None:
        (out / "config.txt").write_text(cfg.to_text())
        report.artifacts = sorted(set(report.artifacts) | {"config.txt", "report.json"})
        (out / "report.json").write_text(report.to_json() + "\n")
        (out / "timing.json").write_text(json.dumps({"wall_clock_s": report.wall_clock}) + "\n")
    return report


# --- commands ----------------------------------------------------------------


def run_mask(cfg: ExperimentConfig) -> RunReport:
    start = time.perf_counter()
    mask = primal_mask(cfg)
    report = RunReport(cfg.to_dict(), results={"record": mask.to_record(), "sum": mask.total(),
                                               "support": list(mask.support), "symmetric": mask.is_symmetric()})
    out = _outdir(cfg)
    if out is not None:
        fileio.write_mask(out / "mask.txt", mask)
        report.artifacts.append("mask.txt")
    return finish(report, cfg, start)


def run_dualmask(cfg: ExperimentConfig) -> RunReport:
    from .duals import DualError

    start = time.perf_counter()
    try:
        spec = DualSpec.default(cfg.n, cfg.h, cfg.dual_vanishing, cfg.dual_degree)
        dual = solve_dual_mask(spec)
    except DualError as exc:
        raise ConfigError(str(exc)) from None
    primal = gp_mask(cfg.n, cfg.h)
    biorth = verify_biorthogonality(primal, dual, L=cfg.cascade_level)
    report = RunReport(cfg.to_dict(), results={"record": dual.to_record(), "dual_vanishing": spec.dual_vanishing,
                                               "degree": spec.m, "biorthogonality": json.loads(biorth.to_json())})
    out = _outdir(cfg)
    if out is not None:
        fileio.write_mask(out / "dualmask.txt", dual)
        (out / "biorth.json").write_text(biorth.to_json() + "\n")
        report.artifacts += ["dualmask.txt", "biorth.json"]
    return finish(report, cfg, start)


def run_gramian(cfg: ExperimentConfig) -> RunReport:
    start = time.perf_counter()
    basis = make_basis(cfg)
    G = gramian(basis)
    A = G.matrix
    nz = np.argwhere(np.abs(A) > 0)
    bw = int(np.abs(nz[:, 0] - nz[:, 1]).max()) if len(nz) else 0
    report = RunReport(cfg.to_dict(), results={
        "size": len(basis), "bandwidth": bw, "condition": condition_number(G),
        "condition_normalized": condition_number(G, normalize=True),
        "quadrature_order": G.quad_order, "max_refinement_change": G.max_refinement_change})
    out = _outdir(cfg)
    if out is not None:
        fileio.write_matrix(out / "gramian.txt", A, bw)
        report.artifacts.append("gramian.txt")
    return finish(report, cfg, start)


def _setup(cfg: ExperimentConfig):
    dom = domain(cfg)
    rng = np.random.default_rng(cfg.seed)
    mask = primal_mask(cfg)
    basis = make_basis(cfg, mask)
    nodes, file_values = load_nodes(cfg, dom, rng)
    sset, cert = sampling_set(cfg, nodes, dom)
    values = sample_values(cfg, nodes, file_values)
    dual = make_dual(cfg, basis, mask)
    pack = assemble_pack(basis, dual, sset, tau=cfg.tau, psi=cfg.psi)
    return dom, rng, basis, sset, cert, values, pack


def run_restore(cfg: ExperimentConfig) -> RunReport:
    start = time.perf_counter()
    dom, rng, basis, sset, cert, values, pack = _setup(cfg)
    fc, state = restore(pack, values, n_max=cfg.nmax, tol=cfg.tol)
    results = {"iterations": state.iteration, "stop_reason": state.stop_reason,
               "final_residual": state.history[-1], "basis_size": len(basis), "nodes": len(sset),
               "tau": pack.tau, "grid_points": len(pack.grid)}
    if len(state.history) >= 10:
        results["eta_hat"] = contraction_estimate(state)
        results["log_residual_slope"], results["log_residual_r2"] = log_residual_fit(state.history)
    if cfg.f is not None:
        results["sup_grid_error"] = float(np.abs(fc - Expression(cfg.f)(pack.grid if dom.d == 2 else pack.grid[:, 0])).max())
    report = RunReport(cfg.to_dict(), cert, results)
    out = _outdir(cfg)
    if out is not None:
        fileio.write_grid(out / "grid.csv", pack.grid, fc)
        fileio.write_history(out / "history.csv", state.history)
        fileio.write_samples(out / "samples.csv", sset.nodes, values)
        report.artifacts += ["grid.csv", "history.csv", "samples.csv"]
    return finish(report, cfg, start)


def run_integrate(cfg: ExperimentConfig) -> RunReport:
    start = time.perf_counter()
    dom, rng, basis, sset, cert, values, pack = _setup(cfg)
    weights = basis_weights(basis)
    reference = cfg.reference
    if reference is None and cfg.f is not None:
        reference = _reference_integral(Expression(cfg.f), dom)
    value, trace = integrate(pack, weights, values, n_max=cfg.nmax, tol=cfg.tol, reference=reference)
    results = {"value": float(value), "reference": reference, "iterations": len(trace.estimates) - 1,
               "checkpoints": trace.checkpoints(_number_list(cfg.checkpoints, int))}
    if reference is not None:
        results["abs_error"] = abs(float(value) - reference)
    if cfg.moments is not None:
        rep = polynomial_exactness_check(pack, weights, cfg.moments, n_max=cfg.nmax)
        results["moments"] = [{"powers": list(r[0]), "estimate": r[1], "exact": r[2], "abs_error": r[3],
                               "iterations": r[4]} for r in rep.rows]
        results["moments_max_error"] = rep.max_error
    if cfg.pairs > 0:
        results["linearity_max_violation"] = linearity_audit(pack, weights, rng, cfg.pairs, n_iter=min(cfg.nmax, 200))
    report = RunReport(cfg.to_dict(), cert, results)
    out = _outdir(cfg)
    if out is not None:
        errs = trace.errors
        rows = ((i, e, errs[i] if errs else None) for i, e in enumerate(trace.estimates))
        fileio.write_csv(out / "trace.csv", ["iter", "estimate", "abs_error"], rows)
        report.artifacts.append("trace.csv")
    return finish(report, cfg, start)


def linearity_audit(pack, weights, rng: np.random.Generator, pairs: int, n_iter: int = 200) -> float:
    """Largest ``|I[a f + b g] - a I[f] - b I[g]|`` over random pairs at every iteration."""
    m = len(pack.nodes)
    F = rng.standard_normal((m, pairs))
    G = rng.standard_normal((m, pairs))
    ab = rng.uniform(-2, 2, (2, pairs))
    H = ab[0] * F + ab[1] * G
    _, tf = integrate(pack, weights, F, n_max=n_iter, tol=None)
    _, tg = integrate(pack, weights, G, n_max=n_iter, tol=None)
    _, th = integrate(pack, weights, H, n_max=n_iter, tol=None)
    worst = 0.0
    for ef, eg, eh in zip(tf.estimates, tg.estimates, th.estimates):
        scale = 1.0 + np.abs(eh)
        worst = max(worst, float(np.max(np.abs(eh - ab[0] * ef - ab[1] * eg) / scale)))
    return worst


def condition_table(n: int, h_values, level: int = 5, interval=(0.0, 1.0), normalize: bool = True) -> list:
    """``(h, kappa_2)`` of the level-``level`` Gramian on ``interval`` for each ``h``."""
    rows = []
    for h in h_values:
        basis = build_interval_basis(gp_mask(n, h), level, interval)
        rows.append((h, condition_number(gramian(basis), normalize=normalize)))
    return rows


def run_condtable(cfg: ExperimentConfig) -> RunReport:
    start = time.perf_counter()
    dom = domain(cfg)
    if dom.d != 1:
        raise ConfigError("condtable works on an interval")
    hs = [_parse_h(s.strip()) for s in cfg.h_list.split(",") if s.strip()]
    for h in hs:
        if not float(h) > cfg.n - 1:
            raise ConfigError(f"h = {h} must exceed n - 1 = {cfg.n - 1}")
    rows = condition_table(cfg.n, hs, cfg.level, dom.bounds[0])
    ordered = sorted(rows, key=lambda r: float(r[0]))
    kappas = [k for _, k in ordered]
    monotone = all(b < a for a, b in zip(kappas, kappas[1:]))
    table = []
    for h, k in rows:
        ref = REFERENCE_CONDITION_NUMBERS.get(h) if cfg.n == 3 and float(h) == int(float(h)) else None
        table.append({"h": h, "kappa": k, "reference": ref, "rel_deviation": None if ref is None else (k - ref) / ref})
    results = {"rows": table, "strictly_decreasing": monotone}
    report = RunReport(cfg.to_dict(), results=results)
    out = _outdir(cfg)
    if out is not None:
        fileio.write_csv(out / "condtable.csv", ["h", "kappa", "reference", "rel_deviation"],
                         ([r["h"], r["kappa"], r["reference"], r["rel_deviation"]] for r in table))
        report.artifacts.append("condtable.csv")
    finish(report, cfg, start)
    if not monotone:
        raise StudyCheckError("condition numbers do not decrease strictly with h")
    return report


def _l2_error(values, exact, weights) -> float:
    return float(np.sqrt(np.sum(weights * (np.asarray(values) - np.asarray(exact)) ** 2)))


def _gauss_grid(dom: BoxDomain, cells: int, order: int = 6):
    (a, b), = dom.bounds
    g, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, cells + 1)
    half = 0.5 * np.diff(edges)
    pts = (0.5 * (edges[:-1] + edges[1:]))[:, None] + half[:, None] * g
    return pts.ravel(), (half[:, None] * w).ravel()


def error_decay(cfg: ExperimentConfig, levels=None) -> dict:
    """L2 error of the RESTORE limit against ``f`` for each level, plus the fitted slope."""
    dom = domain(cfg)
    if dom.d != 1:
        raise ConfigError("decay works on an interval")
    if cfg.f is None:
        raise ConfigError("decay needs f")
    expr = Expression(cfg.f)
    levels = _number_list(cfg.j_list, int) if levels is None else list(levels)
    if sorted(levels) != levels:
        raise ConfigError("j_list must be increasing")
    mask = primal_mask(cfg)
    rows = []
    for j in levels:
        rng = np.random.default_rng(cfg.seed + j)
        basis = make_basis(cfg, mask, j)
        count = int(np.ceil(cfg.oversample * len(basis)))
        nodes = random_nodes(dom, count, rng, cfg.layout, cfg.delta, snap=cfg.snap)
        sset, cert = sampling_set(cfg, nodes, dom)
        x, w = _gauss_grid(dom, 2 ** (j + 2))
        row = {"j": j, "basis_size": len(basis), "nodes": count, "covering_radius": cert["covering_radius"]}
        try:
            pack = assemble_pack(basis, make_dual(cfg, basis, mask), sset, grid=x[:, None], psi=cfg.psi)
            fc, state = restore(pack, expr(nodes), n_max=cfg.nmax, tol=cfg.tol)
            converged = state.stop_reason in ("residual", "fixed point")
            row.update(iterations=state.iteration, stop_reason=state.stop_reason, converged=converged,
                       l2_error=_l2_error(fc, expr(x), w))
        except DivergenceError as exc:
            row.update(iterations=None, stop_reason="diverged", converged=False, l2_error=None, message=str(exc))
        rows.append(row)
    good = [r for r in rows if r["converged"] and r["l2_error"] and r["l2_error"] > 0]
    slope = None
    if len(good) >= 2:
        slope = float(np.polyfit([r["j"] for r in good], np.log2([r["l2_error"] for r in good]), 1)[0])
    return {"rows": rows, "slope": slope, "fitted_levels": [r["j"] for r in good]}


def run_decay(cfg: ExperimentConfig) -> RunReport:
    start = time.perf_counter()
    results = error_decay(cfg)
    report = RunReport(cfg.to_dict(), results=results)
    out = _outdir(cfg)
    if out is not None:
        fileio.write_csv(out / "decay.csv", ["j", "basis_size", "nodes", "iterations", "stop_reason", "l2_error"],
                         ([r["j"], r["basis_size"], r["nodes"], r["iterations"], r["stop_reason"], r["l2_error"]]
                          for r in results["rows"]))
        report.artifacts.append("decay.csv")
    return finish(report, cfg, start)


def gp_study(cfg: ExperimentConfig, h_values=None) -> dict:
    """Identical reconstructions across ``h``: contraction estimate and iterations to ``tol``."""
    dom = domain(cfg)
    hs = [_parse_h(s.strip()) for s in cfg.h_list.split(",") if s.strip()] if h_values is None else list(h_values)
    if cfg.f is None:
        raise ConfigError("gpstudy needs f")
    expr = Expression(cfg.f)
    rng = np.random.default_rng(cfg.seed)
    nodes, _ = load_nodes(cfg, dom, rng)
    sset, cert = sampling_set(cfg, nodes, dom)
    values = expr(nodes)
    rows = []
    for h in hs:
        if not float(h) > cfg.n - 1:
            raise ConfigError(f"h = {h} must exceed n - 1 = {cfg.n - 1}")
        mask = gp_mask(cfg.n, h)
        basis = make_basis(cfg, mask)
        row = {"h": h}
        try:
            pack = assemble_pack(basis, make_dual(cfg, basis, mask), sset, tau=cfg.tau, psi=cfg.psi)
            fc, state = restore(pack, values, n_max=cfg.nmax, tol=cfg.tol)
            grid = pack.grid if dom.d == 2 else pack.grid[:, 0]
            row.update(iterations=state.iteration, stop_reason=state.stop_reason,
                       eta_hat=contraction_estimate(state) if len(state.history) >= 10 else None,
                       final_residual=state.history[-1], sup_error=float(np.abs(fc - expr(grid)).max()))
        except DivergenceError as exc:
            row.update(iterations=None, stop_reason="diverged", eta_hat=None, final_residual=None, sup_error=None,
                       message=str(exc))
        rows.append(row)
    return {"rows": rows, "certificate": cert}


def run_gpstudy(cfg: ExperimentConfig) -> RunReport:
    start = time.perf_counter()
    results = gp_study(cfg)
    cert = results.pop("certificate")
    report = RunReport(cfg.to_dict(), cert, results)
    out = _outdir(cfg)
    if out is not None:
        fileio.write_csv(out / "gpstudy.csv", ["h", "eta_hat", "iterations", "stop_reason", "final_residual", "sup_error"],
                         ([r["h"], r["eta_hat"], r["iterations"], r["stop_reason"], r["final_residual"], r["sup_error"]]
                          for r in results["rows"]))
        report.artifacts.append("gpstudy.csv")
    return finish(report, cfg, start)


RUNNERS = {"mask": run_mask, "dualmask": run_dualmask, "gramian": run_gramian, "restore": run_restore,
           "integrate": run_integrate, "condtable": run_condtable, "decay": run_decay, "gpstudy": run_gpstudy}


def run(cfg: ExperimentConfig) -> RunReport:
    return RUNNERS[cfg.command](cfg)
