"""Monte Carlo harness, statistics, CSV output, error-floor and complexity probes."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import concat, css_ldpc
from .baselines import LdpcOnlyScheme, PolarOnlyScheme
from .channels import ChannelModel, design_crossover, sample
from .concat import CodingScheme, OutcomeBatch
from .css_ldpc import DEFAULT_MAX_ITERS, Side

SCHEMES = ("polar-only", "ldpc-only", "concat")
CHUNK = 1000
Z95 = 1.96
CSV_HEADER = (
    "scheme,channel_kind,channel_param,n_physical,rate_classical,rate_quantum,trials,"
    "block_errors,bler,bler_ci_lo,bler_ci_hi,bit_errors,ber,mean_inner_iters,op_count,seed"
)


class ConfigError(ValueError):
    """Invalid simulation configuration."""


@dataclass(frozen=True)
class InnerSpec:
    """Inner code selector: a seeded bicycle code, the Steane code, or no-check identity."""

    kind: str = "bicycle"
    half_len: int = 256
    row_weight: int = 8
    rows_kept: int = 230
    code_seed: int = 1
    n_in: int = 1

    @classmethod
    def parse(cls, text: str) -> InnerSpec:
        """``half_len,row_weight,rows_kept,code_seed``, ``steane`` or ``identity[:n]``."""
        t = text.strip().lower()
        if t == "steane":
            return cls(kind="steane")
        if t.startswith("identity"):
            _, _, n = t.partition(":")
            return cls(kind="identity", n_in=int(n) if n else 1)
        parts = t.split(",")
        if len(parts) != 4:
            raise ConfigError(f"--inner expects half_len,row_weight,rows_kept,code_seed; got {text!r}")
        try:
            h, w, r, s = (int(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"non-integer --inner value in {text!r}") from exc
        return cls(half_len=h, row_weight=w, rows_kept=r, code_seed=s)

    def build(self) -> css_ldpc.CssCode:
        if self.kind == "steane":
            return css_ldpc.steane_code()
        if self.kind == "identity":
            return css_ldpc.identity_code(self.n_in)
        return css_ldpc.bicycle_construct(self.half_len, self.row_weight, self.rows_kept, self.code_seed)

    def __str__(self) -> str:
        if self.kind == "steane":
            return "steane"
        if self.kind == "identity":
            return f"identity:{self.n_in}"
        return f"{self.half_len},{self.row_weight},{self.rows_kept},{self.code_seed}"


@dataclass(frozen=True)
class SimConfig:
    scheme: str
    channel: ChannelModel
    trials: int = 1000
    seed: int = 0
    inner: InnerSpec = field(default_factory=InnerSpec)
    blocks: int = 1
    outer_k_fraction: float = 0.5
    design_eps: float | None = None
    max_bp_iters: int = DEFAULT_MAX_ITERS
    workers: int = 1
    polar_n: int | None = None
    polar_k: int | None = None

    def resolved_design_eps(self) -> float:
        return design_crossover(self.channel) if self.design_eps is None else self.design_eps

    def block(self) -> dict:
        """The configuration block echoed into CSV output."""
        return {
            "scheme": self.scheme,
            "inner": str(self.inner),
            "blocks": self.blocks,
            "outer_k_fraction": self.outer_k_fraction,
            "design_eps": "channel" if self.design_eps is None else self.design_eps,
            "max_bp_iters": self.max_bp_iters,
            "polar_n": self.polar_n,
            "polar_k": self.polar_k,
            "channel_kind": self.channel.kind,
            "trials": self.trials,
            "seed": self.seed,
        }


def build_scheme(cfg: SimConfig) -> CodingScheme:
    """Instantiate the configured scheme, surfacing every parameter problem as ConfigError."""
    if cfg.scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {cfg.scheme!r}; expected one of {SCHEMES}")
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.max_bp_iters < 1:
        raise ConfigError("max_bp_iters must be >= 1")
    try:
        eps = cfg.resolved_design_eps()
        if not 0.0 <= eps <= 1.0:
            raise ConfigError(f"design eps {eps} outside [0, 1]")
        if cfg.scheme == "polar-only" and cfg.polar_n is not None:
            k = cfg.polar_k if cfg.polar_k is not None else int(math.floor(cfg.outer_k_fraction * cfg.polar_n + 0.5))
            return PolarOnlyScheme(cfg.polar_n, k, eps)
        inner = cfg.inner.build()
        if cfg.scheme == "ldpc-only":
            return LdpcOnlyScheme(inner, cfg.blocks, cfg.max_bp_iters)
        if cfg.scheme == "concat":
            return concat.build(inner, cfg.blocks, cfg.outer_k_fraction, eps, cfg.max_bp_iters)
        # polar-only matched to the concatenated scheme's physical length and rate
        k_in = css_ldpc.pipeline_view(inner, Side.X).k_in
        k = int(math.floor(cfg.outer_k_fraction * cfg.blocks * k_in + 0.5))
        if cfg.polar_k is not None:
            k = cfg.polar_k
        return PolarOnlyScheme(cfg.blocks * inner.n_in, k, eps)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def wilson_interval(errors: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= errors <= trials:
        raise ValueError("need 0 <= errors <= trials and trials >= 1")
    return _wilson(errors / trials, trials, z)


def ber_interval(result: SimResult, z: float = Z95) -> tuple[float, float]:
    """Wilson interval for the BER using the trial count as sample size.

    Bit errors inside one block are strongly correlated, so counting bits
    as independent draws would understate the width; one trial is one
    observation here.
    """
    return _wilson(result.ber, result.trials, z)


def _wilson(p: float, n: int, z: float) -> tuple[float, float]:
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = max(0.0, min(p, center - half))
    hi = min(1.0, max(p, center + half))
    if p == 0.0:
        lo = 0.0
    if p == 1.0:
        hi = 1.0
    return lo, hi


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial_index])


def draw_trials(scheme: CodingScheme, channel: ChannelModel, seed: int, start: int, stop: int):
    """Information words and channel samples for trials ``start..stop-1``."""
    count = stop - start
    n = scheme.n_physical
    info_x = np.empty((count, scheme.k_x), dtype=np.uint8)
    info_z = np.empty((count, scheme.k_z), dtype=np.uint8)
    e_x = np.empty((count, n), dtype=np.uint8)
    e_z = np.empty((count, n), dtype=np.uint8)
    erased = np.empty((count, n), dtype=bool)
    for i, t in enumerate(range(start, stop)):
        rng = trial_rng(seed, t)
        info_x[i] = rng.integers(0, 2, scheme.k_x, dtype=np.uint8)
        info_z[i] = rng.integers(0, 2, scheme.k_z, dtype=np.uint8)
        smp = sample(channel, n, rng)
        e_x[i], e_z[i], erased[i] = smp.e_x, smp.e_z, smp.erased
    return info_x, info_z, e_x, e_z, erased


def run_trials(scheme: CodingScheme, channel: ChannelModel, seed: int, start: int, stop: int) -> OutcomeBatch:
    ix, iz, ex, ez, er = draw_trials(scheme, channel, seed, start, stop)
    return scheme.run_batch(channel, ix, iz, ex, ez, er)


def _chunk_worker(args) -> OutcomeBatch:
    cfg, start, stop = args
    scheme = build_scheme(cfg)
    scheme.prepare(cfg.channel, cfg.seed)
    return run_trials(scheme, cfg.channel, cfg.seed, start, stop)


@dataclass
class SimResult:
    scheme: str
    channel: ChannelModel
    n_physical: int
    rate_classical: float
    rate_quantum: float
    trials: int
    block_errors: int
    bit_errors: int
    total_info_bits: int
    bler: float
    ber: float
    wilson_lo: float
    wilson_hi: float
    mean_inner_iterations: float
    op_count: int
    seed: int
    config: dict = field(default_factory=dict)
    outcomes: OutcomeBatch | None = field(default=None, repr=False, compare=False)

    def row(self) -> list[str]:
        return [
            self.scheme,
            self.channel.kind,
            _fmt(self.channel.param),
            str(self.n_physical),
            _fmt(self.rate_classical),
            _fmt(self.rate_quantum),
            str(self.trials),
            str(self.block_errors),
            _fmt(self.bler),
            _fmt(self.wilson_lo),
            _fmt(self.wilson_hi),
            str(self.bit_errors),
            _fmt(self.ber),
            _fmt(self.mean_inner_iterations),
            str(self.op_count),
            str(self.seed),
        ]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def summarize(cfg: SimConfig, scheme: CodingScheme, out: OutcomeBatch) -> SimResult:
    trials = len(out)
    block_errors = int((~(out.side_x_ok & out.side_z_ok)).sum())
    bit_errors = int(out.info_bit_errors_x.sum() + out.info_bit_errors_z.sum())
    total_bits = trials * (scheme.k_x + scheme.k_z)
    lo, hi = wilson_interval(block_errors, trials)
    return SimResult(
        scheme=cfg.scheme,
        channel=cfg.channel,
        n_physical=scheme.n_physical,
        rate_classical=scheme.rate_classical,
        rate_quantum=scheme.rate_quantum,
        trials=trials,
        block_errors=block_errors,
        bit_errors=bit_errors,
        total_info_bits=total_bits,
        bler=block_errors / trials,
        ber=bit_errors / total_bits if total_bits else 0.0,
        wilson_lo=lo,
        wilson_hi=hi,
        mean_inner_iterations=float(out.inner_iterations.mean()),
        op_count=int(out.op_count.sum()),
        seed=cfg.seed,
        config=cfg.block(),
        outcomes=out,
    )


def run(cfg: SimConfig) -> SimResult:
    """Run ``cfg.trials`` end-to-end trials.

    Trials are processed in fixed chunks of :data:`CHUNK` and merged in trial
    order, so the result does not depend on ``cfg.workers``.
    """
    scheme = build_scheme(cfg)
    bounds = [(s, min(s + CHUNK, cfg.trials)) for s in range(0, cfg.trials, CHUNK)]
    if cfg.workers == 1 or len(bounds) == 1:
        scheme.prepare(cfg.channel, cfg.seed)
        parts = [run_trials(scheme, cfg.channel, cfg.seed, a, b) for a, b in bounds]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_chunk_worker, [(cfg, a, b) for a, b in bounds]))
    return summarize(cfg, scheme, OutcomeBatch.concatenate(parts))


# -- curves and CSV ------------------------------------------------------------


@dataclass
class CurvePoint:
    param: float
    result: SimResult


@dataclass
class Curve:
    scheme: str
    points: list[CurvePoint]
    config: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def params(self) -> list[float]:
        return [p.param for p in self.points]


def sweep(base: SimConfig, grid: Sequence[float], schemes: Sequence[str] | None = None) -> list[Curve]:
    """One run per grid point per scheme; every configuration is validated first."""
    grid = [float(g) for g in grid]
    if not grid:
        raise ConfigError("empty parameter grid")
    diffs = np.diff(grid)
    if len(grid) > 1 and not (np.all(diffs < 0) or np.all(diffs > 0)):
        raise ConfigError("grid values must be strictly monotone")
    schemes = list(schemes) if schemes else [base.scheme]
    cfgs = {}
    for sch in schemes:
        for g in grid:
            try:
                ch = base.channel.with_param(g)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            cfg = replace(base, scheme=sch, channel=ch)
            build_scheme(cfg)
            cfgs[sch, g] = cfg
    order = sorted(grid, reverse=True)
    curves = []
    for sch in schemes:
        pts = [CurvePoint(g, run(cfgs[sch, g])) for g in order]
        block = dict(cfgs[sch, order[0]].block())
        block["grid"] = order
        curves.append(Curve(sch, pts, block))
    return curves


def curves_to_csv(curves: Sequence[Curve]) -> str:
    """CSV text: the header, then per scheme a ``# config`` line and its rows."""
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    for curve in sorted(curves, key=lambda c: c.scheme):
        buf.write("# config " + json.dumps(curve.config, sort_keys=True, separators=(",", ":")) + "\n")
        for pt in sorted(curve.points, key=lambda p: -p.param):
            w.writerow(pt.result.row())
    return buf.getvalue()


def results_to_csv(results: Sequence[SimResult]) -> str:
    groups: dict[str, list[SimResult]] = {}
    for r in results:
        groups.setdefault(r.scheme, []).append(r)
    curves = [Curve(k, [CurvePoint(r.channel.param, r) for r in v], v[0].config) for k, v in groups.items()]
    return curves_to_csv(curves)


def parse_csv(text: str) -> tuple[list[str], list[dict]]:
    """Parse emitted CSV into ``(comment_lines, rows)``; rows keep their raw strings."""
    lines = text.splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("CSV header mismatch")
    cols = CSV_HEADER.split(",")
    comments, rows = [], []
    for ln in lines[1:]:
        if ln.startswith("#"):
            comments.append(ln)
            rows.append({"__comment__": ln})
            continue
        vals = next(csv.reader([ln]))
        if len(vals) != len(cols):
            raise ValueError(f"bad CSV row {ln!r}")
        rows.append(dict(zip(cols, vals)))
    return comments, rows


def emit_parsed(rows: list[dict]) -> str:
    """Re-emit rows from :func:`parse_csv`, normalising numbers to the output format."""
    floats = {"channel_param", "rate_classical", "rate_quantum", "bler", "bler_ci_lo", "bler_ci_hi", "ber", "mean_inner_iters"}
    ints = {"n_physical", "trials", "block_errors", "bit_errors", "op_count", "seed"}
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    for r in rows:
        if "__comment__" in r:
            buf.write(r["__comment__"] + "\n")
            continue
        out = []
        for c in CSV_HEADER.split(","):
            v = r[c]
            if c in floats:
                v = _fmt(float(v))
            elif c in ints:
                v = str(int(v))
            out.append(v)
        w.writerow(out)
    return buf.getvalue()


# -- error floor ---------------------------------------------------------------


@dataclass
class FloorReport:
    params: list[float]
    slopes: list[float]
    floor_detected: bool
    excluded: list[float]

    def summary(self) -> str:
        s = ", ".join(f"{x:.3f}" for x in self.slopes)
        ex = f"; excluded zero-error points {self.excluded}" if self.excluded else ""
        return f"slopes [{s}] floor_detected={self.floor_detected}{ex}"


def error_floor_metric(curve: Curve | Sequence[tuple[float, float]]) -> FloorReport:
    """Local log-log slopes of BLER versus channel parameter and a floor flag.

    Accepts a :class:`Curve` or ``(param, bler)`` pairs ordered by decreasing
    noise.  A floor is flagged when a slope in the final third of the curve
    drops below half of the steepest earlier slope.
    """
    if isinstance(curve, Curve):
        pairs = [(p.param, p.result.bler) for p in curve.points]
    else:
        pairs = [(float(a), float(b)) for a, b in curve]
    if len(pairs) < 4:
        raise ValueError("error_floor_metric needs at least 4 curve points")
    excluded = [p for p, b in pairs if b <= 0]
    kept = [(p, b) for p, b in pairs if b > 0]
    if len(kept) < 3:
        raise ValueError("fewer than 3 points with observed errors")
    lp = np.log10([p for p, _ in kept])
    lb = np.log10([b for _, b in kept])
    slopes = (np.diff(lb) / np.diff(lp)).tolist()
    tail = max(1, math.ceil(len(slopes) / 3))
    head = slopes[:-tail]
    floor = False
    if head:
        ref = max(abs(s) for s in head)
        floor = any(abs(s) < 0.5 * ref for s in slopes[-tail:])
    return FloorReport([p for p, _ in kept], slopes, floor, excluded)


# -- complexity ----------------------------------------------------------------


def fit_exponent(ns: Sequence[float], ops: Sequence[float]) -> float:
    """Least-squares slope of log2(ops) against log2(n)."""
    x = np.log2(np.asarray(ns, dtype=float))
    y = np.log2(np.asarray(ops, dtype=float))
    if x.size < 2 or np.ptp(x) == 0:
        raise ValueError("need at least two distinct n values")
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class ComplexityReport:
    n_values: list[int]
    ops_per_decode: list[float]
    exponent: float

    def summary(self) -> str:
        pairs = ", ".join(f"n={n}: {o:.0f}" for n, o in zip(self.n_values, self.ops_per_decode))
        return f"exponent={self.exponent:.4f} ({pairs})"


def complexity_probe(
    family: Callable[[int], CodingScheme],
    n_values: Sequence[int],
    channel: ChannelModel,
    seed: int = 0,
    trials: int = 4,
) -> ComplexityReport:
    """Fit the growth exponent of decoder operation counts across a code family."""
    ns = [int(n) for n in n_values]
    if len(set(ns)) < 4:
        raise ValueError("complexity_probe needs at least 4 distinct n values")
    ops = []
    for n in ns:
        scheme = family(n)
        scheme.prepare(channel, seed)
        out = run_trials(scheme, channel, seed, 0, trials)
        ops.append(float(out.op_count.mean()))
    return ComplexityReport(ns, ops, fit_exponent(ns, ops))


def polar_family(rate: float = 0.25, design_eps: float = 0.3) -> Callable[[int], CodingScheme]:
    return lambda n: PolarOnlyScheme(n, int(round(rate * n)), design_eps)


def concat_family(inner: css_ldpc.CssCode, outer_k_fraction: float = 0.5, design_eps: float = 0.3) -> Callable[[int], CodingScheme]:
    """Concatenated schemes indexed by outer length ``n`` (``blocks = n / k_in``)."""
    k_in = css_ldpc.pipeline_view(inner, Side.X).k_in

    def make(n: int) -> CodingScheme:
        if n % k_in:
            raise ValueError(f"outer length {n} is not a multiple of k_in={k_in}")
        return concat.build(inner, n // k_in, outer_k_fraction, design_eps)

    return make
