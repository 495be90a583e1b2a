"""Command-line entry point.

Usage::

    planarswitch COMMAND --spec FILE [--seed N] [--out FILE] [...]

A system file is JSON, either explicit matrices::

    {"A0": [[-1, 3], [-0.333, -1]], "A1": [[-1, -0.333], [3, -1]], "lambda": 0.5, "beta": 2.0}

or one of the two exactly solvable families::

    {"family": "rotations", "a": 1, "b": 3, "beta": 2.0}

Scalar results go to stdout as JSON with sorted keys.  Grids go to CSV (stdout
or ``--out``) with ``#`` metadata lines.  Exit codes: 0 success, 2 violated
assumption, 64 usage error, 66 unreadable system file.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import certificates, exact, pdmp, products
from .angular import DegenerateConfiguration, NoHyperbolicSplit, classify
from .planar import NotHurwitzError, as_mat2, expm2, mat_to_list, require_hurwitz, saddle_criterion

EX_OK = 0
EX_ASSUMPTION = 2
EX_USAGE = 64
EX_NOINPUT = 66

COMMANDS = ("check", "classify", "expm", "chi-mc", "chi-exact", "beta-c", "density",
            "sweep", "products", "certificate")

CRITERION_FAILS = "criterion fails: Tr(A0)Tr(A1) - Tr(A0A1) >= -2 sqrt(det A0 det A1)"


class UsageError(Exception):
    pass


class SpecUnreadable(Exception):
    pass


class AssumptionViolated(Exception):
    pass


@dataclass
class SystemSpec:
    A0: np.ndarray
    A1: np.ndarray
    lam: float
    beta: Optional[float]
    model: Optional[exact.ExactModel] = None

    def require_beta(self) -> float:
        if self.beta is None:
            raise AssumptionViolated("system file has no beta")
        return self.beta

    def require_model(self, what: str) -> exact.ExactModel:
        if self.model is None:
            raise AssumptionViolated(f"{what} needs a family system file (rotations or jordan)")
        return self.model

    def system(self, beta: Optional[float] = None) -> pdmp.SwitchedSystem:
        return pdmp.SwitchedSystem(self.A0, self.A1, self.lam, self.require_beta() if beta is None else beta)

    def meta(self) -> dict:
        if self.model is not None:
            m = self.model
            out = {"family": m.family, "b": m.b}
            if m.family == "rotations":
                out["a"] = m.a
        else:
            out = {"A0": mat_to_list(self.A0), "A1": mat_to_list(self.A1)}
        out["lambda"] = self.lam
        if self.beta is not None:
            out["beta"] = self.beta
        return out


def _number(obj, key, required=True):
    if key not in obj:
        if required:
            raise AssumptionViolated(f"system file is missing {key!r}")
        return None
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise AssumptionViolated(f"{key!r} must be a finite number")
    return float(val)


def parse_spec(obj) -> SystemSpec:
    if not isinstance(obj, dict):
        raise AssumptionViolated("system file must hold a JSON object")
    beta = _number(obj, "beta", required=False)
    if beta is not None and beta < 0:
        raise AssumptionViolated("beta must be non-negative")
    if "family" in obj:
        fam = obj["family"]
        if fam not in ("rotations", "jordan"):
            raise AssumptionViolated(f"unknown family {fam!r}")
        b = _number(obj, "b")
        a = _number(obj, "a", required=(fam == "rotations"))
        if b <= 0 or (a is not None and a <= 0):
            raise AssumptionViolated("family parameters must be positive")
        model = exact.rotations(a, b) if fam == "rotations" else exact.jordan(b)
        A0, A1 = model.matrices()
        return SystemSpec(A0, A1, model.lam, beta, model)
    mats = []
    for key in ("A0", "A1"):
        if key not in obj:
            raise AssumptionViolated(f"system file is missing {key!r}")
        try:
            mats.append(as_mat2(obj[key]))
        except (TypeError, ValueError) as exc:
            raise AssumptionViolated(f"{key}: {exc}") from None
        require_hurwitz(mats[-1], key)
    lam = _number(obj, "lambda")
    if not 0.0 < lam < 1.0:
        raise AssumptionViolated("lambda must lie in (0, 1)")
    return SystemSpec(mats[0], mats[1], lam, beta)


def load_spec(path: Optional[str]) -> SystemSpec:
    if path is None:
        raise UsageError("--spec FILE is required")
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SpecUnreadable(f"cannot read system file {path}: {exc}") from None
    return parse_spec(obj)


def parse_beta_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
        raise UsageError(f"--beta-grid expects lo:hi:n or lo:hi:n:log, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"--beta-grid expects lo:hi:n or lo:hi:n:log, got {text!r}") from None
    if n < 1 or not (0 <= lo <= hi) or not math.isfinite(hi):
        raise UsageError("--beta-grid needs 0 <= lo <= hi and n >= 1")
    if len(parts) == 4:
        if lo <= 0:
            raise UsageError("a log grid needs lo > 0")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _clean(x):
    """JSON-safe copy: non-finite floats become strings, arrays become lists."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, np.integer):
        return int(x)
    return x


class Output:
    def __init__(self, out_path: Optional[str], stdout, stderr):
        self.out_path = out_path
        self.stdout = stdout
        self.stderr = stderr

    def json(self, obj):
        self.stdout.write(json.dumps(_clean(obj), sort_keys=True) + "\n")

    def csv(self, header, rows, meta: dict, to_file: Optional[bool] = None):
        buf = io.StringIO()
        for k in sorted(meta):
            buf.write(f"# {k}: {json.dumps(_clean(meta[k]), sort_keys=True)}\n")
        buf.write(",".join(header) + "\n")
        for row in rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        text = buf.getvalue()
        if to_file is None:
            to_file = self.out_path is not None
        if to_file:
            with open(self.out_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            self.stdout.write(text)

    def warn(self, msg):
        self.stderr.write(f"warning: {msg}\n")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _meta(args, spec: SystemSpec, command: str, **extra) -> dict:
    out = {"command": command, "seed": args.seed, "system": spec.meta()}
    out.update(extra)
    return out


# -- commands ------------------------------------------------------------

def cmd_check(args, spec, out):
    rep = saddle_criterion(spec.A0, spec.A1)
    out.json(rep.to_dict())


def _require_criterion(spec):
    if not saddle_criterion(spec.A0, spec.A1).holds:
        raise AssumptionViolated(CRITERION_FAILS)


def cmd_classify(args, spec, out):
    _require_criterion(spec)
    try:
        rep = classify(spec.A0, spec.A1, spec.lam)
    except NoHyperbolicSplit:
        win = saddle_criterion(spec.A0, spec.A1).lambda_window
        raise AssumptionViolated(
            f"A_lambda is not a saddle at lambda={spec.lam}; saddle window is {win}") from None
    out.json(rep.to_dict())


def cmd_expm(args, spec, out):
    A = spec.A0 if args.which == 0 else spec.A1
    out.json({"which": args.which, "t": args.t, "A": mat_to_list(A), "expm": mat_to_list(expm2(A, args.t))})


def _two_class_warning(spec, out, theta0):
    try:
        rep = classify(spec.A0, spec.A1, spec.lam)
    except (NoHyperbolicSplit, DegenerateConfiguration):
        return
    if rep.invariant_interval is not None:
        lo, hi = rep.invariant_interval
        out.warn(f"angular process has two recurrent classes (invariant arc [{lo:.6g}, {hi:.6g}] mod pi); "
                 f"the estimate is conditional on the class entered from theta0={theta0:.6g}")


def _theta0(args, sys_):
    return sys_.default_theta0() if args.theta0 is None else args.theta0


def cmd_chi_mc(args, spec, out):
    sys_ = spec.system()
    th = _theta0(args, sys_)
    _two_class_warning(spec, out, th)
    est = pdmp.simulate_chi(sys_, theta0=th, i0=args.i0, horizon=args.horizon,
                            replicas=args.replicas, seed=args.seed)
    res = est.to_dict()
    res.update({"theta0": th, "i0": args.i0, "beta": sys_.beta})
    out.json(res)


def cmd_chi_exact(args, spec, out):
    model = spec.require_model("chi-exact")
    if args.beta_grid is not None:
        grid = parse_beta_grid(args.beta_grid)
        rows = []
        for b in grid:
            val, how = exact.chi_exact_report(model, float(b))
            rows.append((float(b), val, how))
        out.csv(["beta", "chi_exact", "method"], rows, _meta(args, spec, "chi-exact", beta_grid=args.beta_grid))
        return
    beta = spec.require_beta()
    val, how = exact.chi_exact_report(model, beta)
    out.json({"beta": beta, "chi_exact": val, "method": how})


def cmd_beta_c(args, spec, out):
    model = spec.require_model("beta-c")
    try:
        bc = exact.beta_c(model)
    except exact.NoTransition as exc:
        raise AssumptionViolated(str(exc)) from None
    res = {"beta_c": bc, "chi_at_beta_c": exact.chi_exact(model, bc)}
    lim = exact.chi_limits(model)
    res.update({"chi_at_zero": lim.chi_at_zero, "chi_at_infinity": lim.chi_at_infinity})
    if args.beta_grid is not None:
        grid = parse_beta_grid(args.beta_grid)
        rows = [(float(b), exact.chi_exact(model, float(b))) for b in grid]
        out.csv(["beta", "chi_exact"], rows, _meta(args, spec, "beta-c", beta_c=bc, beta_grid=args.beta_grid),
                to_file=args.out is not None)
        if args.out is None:
            return
    out.json(res)


def cmd_density(args, spec, out):
    model = spec.require_model("density")
    beta = spec.require_beta()
    ev = exact.density(model, beta, n=args.bins)
    rows = [(float(t), float(p0), float(p1)) for t, (p0, p1) in zip(ev.theta, ev.pdf.T)]
    out.csv(["theta", "weight_i0", "weight_i1"], rows,
            _meta(args, spec, "density", points=args.bins, total_mass=ev.total_mass()))


def cmd_sweep(args, spec, out):
    if args.beta_grid is None:
        raise UsageError("sweep needs --beta-grid lo:hi:n(:log)")
    grid = np.sort(parse_beta_grid(args.beta_grid))
    header = ["beta"] + (["chi_exact"] if spec.model is not None else []) + ["chi_mc", "chi_mc_stderr"]
    rows = []
    for b in grid:
        b = float(b)
        if b <= 0:
            raise AssumptionViolated("sweep needs beta > 0 for simulation")
        sys_ = spec.system(b)
        est = pdmp.simulate_chi(sys_, theta0=_theta0(args, sys_), i0=args.i0, horizon=args.horizon,
                                replicas=args.replicas, seed=args.seed)
        row = [b]
        if spec.model is not None:
            row.append(exact.chi_exact(spec.model, b))
        rows.append(row + [est.value, est.std_error])
    out.csv(header, rows, _meta(args, spec, "sweep", beta_grid=args.beta_grid, horizon=args.horizon,
                                replicas=args.replicas))


def cmd_products(args, spec, out):
    sys_ = spec.system()
    trace_every = args.trace_every if args.out is not None else 0
    est = products.product_lyapunov(sys_, args.variant, args.steps, args.replicas, args.seed,
                                    renorm_every=1, trace_every=trace_every)
    res = est.to_dict()
    scale = products.per_step_scale(sys_)
    res["per_step_time"] = scale
    if spec.model is not None:
        b = sys_.beta if args.variant == "alternating" else sys_.beta / 2
        res["predicted"] = exact.chi_exact(spec.model, b) * scale
    out.json(res)
    if args.out is not None:
        rows = list(zip(est.trace_steps.tolist(), est.trace_values.tolist()))
        out.csv(["k", "running_estimate"], rows,
                _meta(args, spec, "products", variant=args.variant, steps=args.steps, trace_every=trace_every),
                to_file=True)


def cmd_certificate(args, spec, out):
    cert = certificates.small_beta_certificate(spec.A0, spec.A1, spec.lam)
    res = cert.to_dict()
    if spec.model is not None:
        try:
            bc = exact.beta_c(spec.model)
            res["beta_c"] = bc
            res["gap"] = bc - cert.beta1
        except exact.NoTransition:
            res["beta_c"] = None
    out.json(res)


HANDLERS = {
    "check": cmd_check,
    "classify": cmd_classify,
    "expm": cmd_expm,
    "chi-mc": cmd_chi_mc,
    "chi-exact": cmd_chi_exact,
    "beta-c": cmd_beta_c,
    "density": cmd_density,
    "sweep": cmd_sweep,
    "products": cmd_products,
    "certificate": cmd_certificate,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seed(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(kind):
    def conv(text):
        try:
            v = kind(float(text)) if kind is int else kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
        if not v > 0:
            raise argparse.ArgumentTypeError("must be positive")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="planarswitch", description="Stability of planar randomly switched linear systems.")
    p.add_argument("command", metavar="COMMAND", help=" | ".join(COMMANDS))
    p.add_argument("--spec", help="JSON system file")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", help="write CSV output here")
    p.add_argument("--replicas", type=_positive(int), default=32)
    p.add_argument("--horizon", type=_positive(float), default=1e5)
    p.add_argument("--steps", type=_positive(int), default=100_000)
    p.add_argument("--beta-grid", help="lo:hi:n or lo:hi:n:log")
    p.add_argument("--theta0", type=float, default=None, help="initial angle (default: attracting direction + 0.1)")
    p.add_argument("--i0", type=int, choices=(0, 1), default=0)
    p.add_argument("--variant", choices=products.VARIANTS, default="alternating")
    p.add_argument("--trace-every", type=_positive(int), default=1000)
    p.add_argument("--bins", type=_positive(int), default=512, help="density grid points")
    p.add_argument("--t", type=float, default=1.0, help="time for expm")
    p.add_argument("--which", type=int, choices=(0, 1), default=0, help="matrix for expm")
    return p


def run_command(argv, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(list(argv))
        if args.command not in HANDLERS:
            raise UsageError(f"unknown command {args.command!r}; expected one of {', '.join(COMMANDS)}")
        spec = load_spec(args.spec)
        HANDLERS[args.command](args, spec, Output(args.out, stdout, stderr))
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return EX_USAGE
    except SpecUnreadable as exc:
        stderr.write(f"{exc}\n")
        return EX_NOINPUT
    except (AssumptionViolated, NotHurwitzError, DegenerateConfiguration) as exc:
        stderr.write(f"{exc}\n")
        return EX_ASSUMPTION
    except ValueError as exc:
        stderr.write(f"{exc}\n")
        return EX_ASSUMPTION
    return EX_OK


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    raise SystemExit(main())
