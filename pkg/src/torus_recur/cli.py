"""Command-line front end: ``torus-recur <subcommand> ...``.

Every subcommand writes one JSON record (or a CSV table with
``--format csv``) to stdout or ``--out``.  Exit codes: 0 success, 1 usage
error, 2 domain error, 3 cap or runtime guardrail exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources

from .errors import CapExceeded, TorusRecurError
from .exact_core import MP, H, IntMatrix2, prepare
from .periodic_points import (
    DEFAULT_CAP,
    candidate_lattice_even,
    candidate_lattice_odd,
    enumerate_periodic,
    inner_lattice_odd,
    is_periodic,
)
from .recurrence_geometry import RecurrenceConfig

SCHEMA_VERSION = 1
GUARD_SECONDS = 600.0
DEFAULT_MATRIX = (2, 1, 1, 1)
DEFAULT_ALPHA = 1.0


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation; ``to_json``/``from_json`` round-trip exactly."""

    command: str
    matrix: tuple = DEFAULT_MATRIX
    alpha: float | None = None
    rates: tuple | None = None
    rates_path: str | None = None
    ns: tuple | None = None
    knobs: dict = field(default_factory=dict)
    seed: int | None = None
    cap: int = DEFAULT_CAP
    format: str = "json"
    out: str | None = None
    force: bool = False

    def to_json(self) -> dict:
        d = asdict(self)
        d["matrix"] = list(self.matrix)
        d["rates"] = list(self.rates) if self.rates is not None else None
        d["ns"] = list(self.ns) if self.ns is not None else None
        d["knobs"] = dict(sorted(self.knobs.items()))
        return d

    def canonical(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, d: dict) -> "RunConfig":
        d = dict(d)
        d["matrix"] = tuple(d["matrix"])
        d["rates"] = tuple(d["rates"]) if d.get("rates") is not None else None
        d["ns"] = tuple(d["ns"]) if d.get("ns") is not None else None
        d["knobs"] = dict(d.get("knobs") or {})
        return cls(**d)

    def params(self) -> dict:
        """The user-facing parameters recorded in result files."""
        p = {"matrix": list(self.matrix)}
        if self.rates is not None:
            p["rates_path"] = self.rates_path
        elif self.alpha is not None:
            p["alpha"] = self.alpha
        if self.ns is not None:
            p["n"] = list(self.ns)
        p.update(self.knobs)
        return p


def _parse_matrix(text: str) -> tuple:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"matrix must be four integers a,b,c,d, got {text!r}") from None
    if len(vals) != 4:
        raise UsageError(f"matrix must have four entries, got {len(vals)}")
    return vals


def _parse_range(text: str, default_step: int = 1) -> tuple:
    """``N`` or ``LO:HI[:STEP]`` (inclusive) into a tuple of ints."""
    parts = text.split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad integer range {text!r}") from None
    if len(nums) == 1:
        return (nums[0],)
    if len(nums) not in (2, 3):
        raise UsageError(f"range must be LO:HI[:STEP], got {text!r}")
    lo, hi = nums[0], nums[1]
    step = nums[2] if len(nums) == 3 else default_step
    if step < 1 or hi < lo:
        raise UsageError(f"empty range {text!r}")
    return tuple(range(lo, hi + 1, step))


def _parse_delta_grid(text: str) -> tuple:
    """``LO:HI:COUNT`` log-spaced box sizes."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("delta grid must be LO:HI:COUNT")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"bad delta grid {text!r}") from None
    if not (0 < lo < hi) or count < 2:
        raise UsageError("delta grid needs 0 < LO < HI and COUNT >= 2")
    r = math.log(hi / lo) / (count - 1)
    return tuple(lo * math.exp(r * i) for i in range(count))


def _parse_float_grid(text: str) -> tuple:
    """``LO:HI:COUNT`` evenly spaced values."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("grid must be LO:HI:COUNT")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"bad grid {text!r}") from None
    if count < 2 or hi <= lo:
        raise UsageError("grid needs HI > LO and COUNT >= 2")
    return tuple(lo + (hi - lo) * i / (count - 1) for i in range(count))


def _read_rates(path: str) -> tuple:
    try:
        with open(path, encoding="utf-8") as fh:
            vals = [ln.strip() for ln in fh]
    except OSError as e:
        raise UsageError(f"cannot read rates file: {e}") from None
    try:
        return tuple(float(v) for v in vals if v and not v.startswith("#"))
    except ValueError:
        raise UsageError(f"rates file {path!r} must hold one number per line") from None


# ---------------------------------------------------------------------------
# shared setup
# ---------------------------------------------------------------------------

def _setup(cfg: RunConfig, need_rate: bool = True):
    """Normalized spectral data, the rate config for it, and a normalization note."""
    spec, k = prepare(cfg.matrix)
    rc = None
    if need_rate:
        if cfg.rates is not None:
            base = RecurrenceConfig.from_rates(cfg.rates)
        else:
            base = RecurrenceConfig(alpha=cfg.alpha if cfg.alpha is not None else DEFAULT_ALPHA)
        rc = base.scaled(k)
    note = None
    if k != 1:
        note = (f"matrix replaced by its square (det -1 or negative eigenvalue); "
                f"rates rescaled so n counts steps of A^{k}")
    return spec, k, rc, note


def _envelope(op: str, cfg: RunConfig, result: dict, seed=None, estimate=None, stderr=None,
              runtime_ms=None, note=None) -> dict:
    rec = {
        "schema_version": SCHEMA_VERSION,
        "op": op,
        "params": cfg.params(),
        "seed": seed,
        "estimate": estimate,
        "stderr": stderr,
        "runtimeMs": runtime_ms,
        "result": result,
    }
    if note:
        rec["normalization"] = note
    return rec


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _guard(cfg: RunConfig, seconds: float, what: str):
    if seconds > GUARD_SECONDS and not cfg.force:
        raise CapExceeded(f"{what}: estimated runtime {seconds / 60:.1f} min exceeds 10 min; pass --force")


def _fmt_mp(x, digits=30):
    return MP.nstr(x, digits)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_analyze(cfg: RunConfig):
    from .exact_core import spectral_analyze

    A = IntMatrix2(*cfg.matrix)
    orig = spectral_analyze(A)
    spec, k, _, note = _setup(cfg, need_rate=False)
    res = {
        "det": orig.det,
        "trace": orig.trace,
        "D": orig.D,
        "lambda_exact": str(orig.lam),
        "lambda": _fmt_mp(orig.lam.to_mpf()),
        "logLambda": _fmt_mp(orig.log_lambda),
        "normalization_exponent": k,
        "normalized_matrix": list(spec.matrix.entries()),
        "normalized_lambda": _fmt_mp(spec.lam.to_mpf()),
    }
    if cfg.format == "csv":
        return _csv(sorted(res.items()), ["key", "value"])
    return _envelope("analyze", cfg, res, note=note)


def cmd_periodic(cfg: RunConfig):
    spec, k, _, note = _setup(cfg, need_rate=False)
    (n,) = _single_n(cfg)
    kn = cfg.knobs
    if kn.get("count_only"):
        cnt = abs(H(spec, n))
        if cfg.format == "csv":
            return _csv([[n, cnt]], ["n", "count"])
        return _envelope("periodic", cfg, {"n": n, "count": cnt}, note=note)
    if kn.get("check_lattice"):
        return _check_lattice(cfg, spec, n, note)
    ps = enumerate_periodic(spec, n, cap=cfg.cap)
    pts = [[str(p.x), str(p.y)] for p in ps.points]
    if cfg.format == "csv":
        return _csv(pts, ["x", "y"])
    return _envelope("periodic", cfg, {"n": n, "count": ps.count, "points": pts}, note=note)


def _check_lattice(cfg, spec, n, note):
    checks = {}
    if n % 2 == 1:
        kk = (n - 1) // 2
        inner = inner_lattice_odd(spec, kk)
        checks["inner_lattice_periodic"] = all(is_periodic(spec, p, n) for p in inner)
        den = candidate_lattice_odd(spec, kk)
    else:
        den = candidate_lattice_even(spec, n // 2)
    pts = enumerate_periodic(spec, n, cap=cfg.cap).points
    checks["denominators_divide"] = all(den % p.x.denominator == 0 and den % p.y.denominator == 0 for p in pts)
    ok = all(checks.values())
    res = {"n": n, "lattice_denominator": den, "checks": checks, "status": "PASS" if ok else "FAIL"}
    if cfg.format == "csv":
        return _csv([[n, den, res["status"]]], ["n", "denominator", "status"])
    return _envelope("periodic", cfg, res, note=note)


def cmd_curve(cfg: RunConfig):
    from .dimension_lab.formula import dim_curve

    spec, k, _, note = _setup(cfg, need_rate=False)
    L = float(spec.log_lambda) / k  # per step of the user's matrix
    alphas = cfg.knobs.get("alpha_grid") or _parse_float_grid("0.1:3.0:30")
    rows = [(f.alpha, f.s0, f.s1, f.activeBranch) for f in dim_curve(alphas, L)]
    if cfg.format == "json":
        return _envelope("curve", cfg, {"logLambda": L, "rows": [
            {"alpha": a, "s0": s0, "s1": s1, "branch": b} for a, s0, s1, b in rows]}, note=note)
    return _csv([[repr(a), repr(s0), repr(s1), b] for a, s0, s1, b in rows], ["alpha", "s0", "s1", "branch"])


def _single_n(cfg):
    if not cfg.ns or len(cfg.ns) != 1:
        raise UsageError("this subcommand needs a single -n")
    return cfg.ns


def _window(cfg, default):
    return cfg.ns if cfg.ns else default


def cmd_boxcount(cfg: RunConfig):
    from .dimension_lab.boxcount import boxcount_estimate
    from .recurrence_geometry import piece_geometry

    spec, k, rc, note = _setup(cfg)
    ns = _window(cfg, (3, 5, 7, 9))
    # cost model: column entries at the finest scale of each layer (about 3e-8 s each)
    cost = 0.0
    for n in ns:
        g = piece_geometry(spec, rc, n)
        cost += abs(H(spec, n)) * 4.0 * g.lambda1 / g.lambda2 * 3e-8 * 3
    _guard(cfg, cost, "boxcount")
    t = time.perf_counter()
    r = boxcount_estimate(spec, rc, ns, deltaGrid=cfg.knobs.get("delta_grid"), cap=cfg.cap)
    ms = (time.perf_counter() - t) * 1e3
    if cfg.format == "csv":
        return r.to_csv()
    return _envelope("boxcount", cfg, r.to_json(), estimate=r.fittedSlope,
                     runtime_ms=ms if cfg.knobs.get("timing") else None, note=note)


def cmd_energy(cfg: RunConfig):
    from .dimension_lab.energy import riesz_energy_1d, riesz_energy_2d

    spec, k, rc, note = _setup(cfg)
    (n,) = _single_n(cfg)
    kn = cfg.knobs
    s = kn["s"]
    t = time.perf_counter()
    if kn["dim"] == 2:
        pairs = kn.get("samples") or 10_000_000
        _guard(cfg, pairs * 4e-7, "energy")
        r = riesz_energy_2d(spec, rc, n, s, sampler=kn.get("sampler", "hybrid"), pairs=pairs,
                            seed=cfg.seed, cap=cfg.cap)
    else:
        r = riesz_energy_1d(spec, rc, kn.get("x0", 0.3), n, s)
    ms = (time.perf_counter() - t) * 1e3
    if cfg.format == "csv":
        return _csv([[r.n, repr(r.s), repr(r.estimate), repr(r.stderr), r.sampleCount, r.seed]],
                    ["n", "s", "estimate", "stderr", "sampleCount", "seed"])
    return _envelope("energy", cfg, asdict(r), seed=r.seed, estimate=r.estimate, stderr=r.stderr,
                     runtime_ms=ms if kn.get("timing") else None, note=note)


def cmd_slice(cfg: RunConfig):
    from .recurrence_geometry import line_slice

    spec, k, rc, note = _setup(cfg)
    x0 = cfg.knobs.get("x0", 0.3)
    lam = spec.lam.to_mpf()
    rows = []
    for n in _window(cfg, (5, 7, 9, 11)):
        fam = line_slice(spec, rc, x0, n)
        ratio = float(fam.M / (rc.r(n) * lam**n))
        rows.append({"n": n, "M": fam.M, "M_over_r_lambda_n": ratio, "lambda2": fam.lambda2,
                     "intervals": fam.intervals.tolist() if cfg.knobs.get("intervals") else None})
    if cfg.format == "csv":
        return _csv([[r["n"], r["M"], repr(r["M_over_r_lambda_n"])] for r in rows], ["n", "M", "M_over_r_lambda_n"])
    return _envelope("slice", cfg, {"x0": x0, "rows": rows}, note=note)


def cmd_separation(cfg: RunConfig):
    from .recurrence_geometry import pairwise_separation

    spec, k, rc, note = _setup(cfg)
    rows = []
    for n in _window(cfg, tuple(range(3, 16, 2))):
        r = pairwise_separation(spec, rc, n)
        rows.append({"n": n, "pieces": r.pieces, "d_n": _fmt_mp(r.d_n, 20),
                     "d_n_lambda_n": _fmt_mp(r.scaled, 20),
                     "line_separation_lambda_n": _fmt_mp(r.line_scaled, 20),
                     "witness": list(r.witness)})
    if cfg.format == "csv":
        return _csv([[r["n"], r["pieces"], r["d_n"], r["d_n_lambda_n"], r["line_separation_lambda_n"]] for r in rows],
                    ["n", "pieces", "d_n", "d_n_lambda_n", "line_separation_lambda_n"])
    return _envelope("separation", cfg, {"rows": rows}, note=note)


def cmd_covering(cfg: RunConfig):
    from .dimension_lab.formula import covering_upper_counts

    spec, k, rc, note = _setup(cfg)
    s = cfg.knobs["s"]
    rows = []
    for n in _window(cfg, tuple(range(20, 31))):
        c = covering_upper_counts(spec, rc, n, s)
        rows.append({"n": n, "ballSumTerm": _fmt_mp(c.ballSumTerm, 20),
                     "squareSumTerm": _fmt_mp(c.squareSumTerm, 20), "gamma": c.gamma})
    if cfg.format == "csv":
        return _csv([[r["n"], r["ballSumTerm"], r["squareSumTerm"]] for r in rows], ["n", "ballSumTerm", "squareSumTerm"])
    return _envelope("covering", cfg, {"s": s, "rows": rows}, note=note)


def cmd_uniformity(cfg: RunConfig):
    from .dimension_lab.uniformity import BallSpec, measure_uniformity

    spec, k, rc, note = _setup(cfg)
    (n,) = _single_n(cfg)
    kn = cfg.knobs
    bs = BallSpec(count=kn.get("balls", 100), radius=kn.get("radius", 0.1),
                  samples=kn.get("samples") or 100_000, seed=cfg.seed)
    _guard(cfg, bs.count * bs.samples * 2e-7, "uniformity")
    m = measure_uniformity(spec, rc, n, bs, cap=cfg.cap)
    if cfg.format == "csv":
        return _csv([[c[0], c[1], repr(r)] for c, r in zip(m.balls, m.ratios)], ["cx", "cy", "ratio"])
    return _envelope("uniformity", cfg, m.to_json(), seed=cfg.seed, estimate=m.maxRatio / m.minRatio, note=note)


def cmd_disintegration(cfg: RunConfig):
    from .dimension_lab.disintegration import disintegration_bound

    spec, k, rc, note = _setup(cfg)
    kn = cfg.knobs
    fam = kn.get("family", "slices")
    ns = _window(cfg, (9,))
    r = disintegration_bound(spec, rc, ns, kn["s"], kn["t"], samplePoints=kn.get("points", 200),
                             family=fam, seed=cfg.seed)
    if cfg.format == "csv":
        return _csv([[p.x[0], p.x[1], repr(p.lhs), repr(p.lhs_stderr), repr(p.rhs)] for p in r.points],
                    ["x1", "x2", "lhs", "lhs_stderr", "rhs"])
    return _envelope("disintegration", cfg, r.to_json(), seed=cfg.seed, estimate=r.energy,
                     stderr=r.energy_stderr, note=note)


COMMANDS = {
    "analyze": cmd_analyze,
    "periodic": cmd_periodic,
    "curve": cmd_curve,
    "boxcount": cmd_boxcount,
    "energy": cmd_energy,
    "slice": cmd_slice,
    "separation": cmd_separation,
    "covering": cmd_covering,
    "uniformity": cmd_uniformity,
    "disintegration": cmd_disintegration,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p, rate=True, n=True, seed=False):
    p.add_argument("-m", "--matrix", default="2,1,1,1", help="matrix entries a,b,c,d (default: cat map)")
    if rate:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--alpha", type=float, help=f"r_n = exp(-alpha n) (default {DEFAULT_ALPHA})")
        g.add_argument("--rates", metavar="FILE", help="explicit r_n table, one value per line")
    if n:
        p.add_argument("-n", "--window", dest="n", metavar="N|LO:HI[:STEP]", help="layer index or range")
    if seed:
        p.add_argument("--seed", type=int, default=42)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum number of periodic points")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    p.add_argument("--force", action="store_true", help="run even if estimated runtime exceeds 10 min")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="torus-recur", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="spectral report")
    _common(p, rate=False, n=False)

    p = sub.add_parser("periodic", help="period-n points")
    _common(p, rate=False)
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--check-lattice", action="store_true")

    p = sub.add_parser("curve", help="dimension as a function of alpha")
    _common(p, rate=False, n=False)
    p.add_argument("--alpha-grid", default="0.1:3.0:30", metavar="LO:HI:COUNT")
    p.set_defaults(format="csv")

    p = sub.add_parser("boxcount", help="box-counting exponent over a window of layers")
    _common(p)
    p.add_argument("--delta-grid", metavar="LO:HI:COUNT")
    p.add_argument("--timing", action="store_true", help="record runtimeMs (output no longer byte-stable)")

    p = sub.add_parser("energy", help="Riesz energy of the layer measure")
    _common(p, seed=True)
    p.add_argument("--dim", type=int, choices=(1, 2), default=2)
    p.add_argument("-s", type=float, required=True, help="energy exponent")
    p.add_argument("--x0", type=float, default=0.3, help="vertical line for --dim 1")
    p.add_argument("--samples", type=int, help="Monte Carlo pairs (default 1e7)")
    p.add_argument("--sampler", choices=("hybrid", "pairs"), default="hybrid")
    p.add_argument("--timing", action="store_true")

    p = sub.add_parser("slice", help="chords of the odd sub-layer on a vertical line")
    _common(p)
    p.add_argument("--x0", type=float, default=0.3)
    p.add_argument("--intervals", action="store_true", help="include the chord list")

    p = sub.add_parser("separation", help="minimum distance between pieces")
    _common(p)

    p = sub.add_parser("covering", help="terms of the two covering sums")
    _common(p)
    p.add_argument("-s", type=float, required=True)

    p = sub.add_parser("uniformity", help="mu_n(B)/Leb(B) over random balls")
    _common(p, seed=True)
    p.add_argument("--balls", type=int, default=100)
    p.add_argument("--radius", type=float, default=0.1)
    p.add_argument("--samples", type=int)

    p = sub.add_parser("disintegration", help="potential bound for line-disintegrated measures")
    _common(p, seed=True)
    p.add_argument("-s", type=float, required=True)
    p.add_argument("-t", type=float, required=True)
    p.add_argument("--family", choices=("slices", "uniform"), default="slices")
    p.add_argument("--points", type=int, default=200)
    return ap


_KNOBS = {
    "periodic": ("count_only", "check_lattice"),
    "curve": ("alpha_grid",),
    "boxcount": ("delta_grid", "timing"),
    "energy": ("dim", "s", "x0", "samples", "sampler", "timing"),
    "slice": ("x0", "intervals"),
    "covering": ("s",),
    "uniformity": ("balls", "radius", "samples"),
    "disintegration": ("s", "t", "family", "points"),
}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    knobs = {}
    for key in _KNOBS.get(ns.command, ()):
        v = getattr(ns, key, None)
        if key == "alpha_grid" and v is not None:
            v = _parse_float_grid(v)
        if key == "delta_grid" and v is not None:
            v = _parse_delta_grid(v)
        if v is not None and v is not False:
            knobs[key] = list(v) if isinstance(v, tuple) else v
    rates = rates_path = None
    if getattr(ns, "rates", None):
        rates_path = ns.rates
        rates = _read_rates(ns.rates)
    n = getattr(ns, "n", None)
    return RunConfig(
        command=ns.command,
        matrix=_parse_matrix(ns.matrix),
        alpha=getattr(ns, "alpha", None),
        rates=rates,
        rates_path=rates_path,
        ns=_parse_range(n) if n else None,
        knobs=knobs,
        seed=getattr(ns, "seed", None),
        cap=ns.cap,
        format=ns.format,
        out=ns.out,
        force=ns.force,
    )


def run(cfg: RunConfig) -> str:
    out = COMMANDS[cfg.command](cfg)
    if isinstance(out, dict):
        return json.dumps(out, sort_keys=True, indent=2) + "\n"
    return out


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        text = run(cfg)
    except UsageError as e:
        print(f"torus-recur: usage error: {e}", file=sys.stderr)
        return 1
    except TorusRecurError as e:
        print(f"torus-recur: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except ValueError as e:
        print(f"torus-recur: invalid input: {e}", file=sys.stderr)
        return 1
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def schema() -> dict:
    """The JSON schema every record conforms to."""
    return json.loads(resources.files("torus_recur").joinpath("schemas/result.schema.json").read_text("utf-8"))



if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
