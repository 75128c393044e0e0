"""Command-line front end: one claim per invocation, one JSON certificate per claim."""

from __future__ import annotations

import argparse
import shlex
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from . import reports as R
from .certnum import Interval, format_rational, parse_rational

MANIFEST = [
    ("thm1", "gauss-perimeter certify",
     "certified lower bound for the Gaussian perimeter constant: outward-rounded trapezoid "
     "sum minus a rigorous second-derivative error term"),
    ("thm1-aux", "gauss-perimeter {p, asymptote}",
     "interval enclosures of the facet escape probability; asymptote ratios are diagnostics"),
    ("thm2", "moment-ratio",
     "exact Hermite moments under the Gaussian and on the Hamming cube; roots are reported as floats"),
    ("thm3", "slice {ratio, poincare, spectrum, search}",
     "exact L1/L2 comparison and Poincare chain on the middle slice; spectrum and search are "
     "numerical diagnostics"),
    ("thm4", "autoconv {young-check, chain}",
     "exact Young-type bound on step profiles; chain evaluates b - 2/m - 1/(2m^2) for an "
     "external b, not certified here"),
    ("thm4-aux", "autoconv {sup, search}",
     "exact autoconvolution suprema and certified minima over small quantized classes"),
    ("defs", "sidon {check, beta}",
     "exhaustive g-Sidon checks, counting unordered pairs a <= b with repetition"),
]


def manifest() -> str:
    lines = [f"{cid} → {cmd}\n    {what}" for cid, cmd, what in MANIFEST]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage mistakes exit with code 1, like every other error
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _rational_list(text: str) -> list[Fraction]:
    return [_rational(t) for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from exc


def _global_flags(p: argparse.ArgumentParser, *, suppress: bool) -> None:
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--report", type=Path, help="write the JSON certificate here", **kw)
    p.add_argument("--threads", type=int, help="worker processes (default 1)",
                   **(kw or {"default": 1}))
    p.add_argument("--seed", type=int, help="random seed (default 0)", **(kw or {"default": 0}))
    p.add_argument("--timing", action="store_true",
                   help="include wall_time_ms in the report (breaks byte-identity)", **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="extremal", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(group, name: str, help: str) -> argparse.ArgumentParser:
        p = group.add_parser(name, help=help)
        _global_flags(p, suppress=True)
        return p

    gp = sub.add_parser("gauss-perimeter", help="Gaussian perimeter lower bound")
    gv = gp.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    c = leaf(gv, "certify", "certify the lower bound for the perimeter constant")
    c.add_argument("--a", type=_rational, default=Fraction(6131, 5000))
    c.add_argument("--b", type=_rational, default=Fraction(2387, 1000))
    c.add_argument("--W", type=_rational, default=Fraction(6))
    c.add_argument("--h", type=_rational, default=Fraction(1, 2000))
    c.add_argument("--target", type=_rational, default=Fraction(312584, 10**6))
    c = leaf(gv, "p", "enclose the facet escape probability p(r)")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--r", type=_rational, required=True)
    c.add_argument("--a", type=_rational, default=Fraction(6131, 5000),
                   help="rho = a n^(1/4) unless --rho is given")
    c.add_argument("--rho", type=_rational)
    c.add_argument("--alt-exponent", action="store_true",
                   help="use the density exponent (n-1)/2 instead of (n-2)/2")
    c = leaf(gv, "asymptote", "ratio of p to its main term along r = sqrt(n-1) + w")
    c.add_argument("--n", type=_int_list, default=[10**4, 10**6])
    c.add_argument("--a", type=_rational, default=Fraction(6131, 5000))
    c.add_argument("--w", type=_rational, default=Fraction(0))

    c = sub.add_parser("moment-ratio", help="Hermite L4/L2 ratios, Gaussian and cube")
    _global_flags(c, suppress=True)
    c.add_argument("--m", type=int, default=2)
    c.add_argument("--N", type=int, default=1000)
    c.add_argument("--gaussian-only", action="store_true")
    c.add_argument("--walsh-check", action="store_true",
                   help="also compute the Walsh degree (needs N <= 14)")

    sp = sub.add_parser("slice", help="Khintchine comparison on the middle slice")
    sv = sp.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for verb, help in (("ratio", "exact L1/L2 ratio against c_n"),
                       ("poincare", "exact Poincare chain and pointwise bound"),
                       ("spectrum", "spectrum of the transposition Laplacian"),
                       ("search", "multi-start search for the optimal constant")):
        c = leaf(sv, verb, help)
        c.add_argument("--n", type=int, required=True)
        if verb in ("ratio", "poincare"):
            c.add_argument("--a", type=_rational_list, required=True)
        if verb == "search":
            c.add_argument("--restarts", type=int, default=200)

    ap = sub.add_parser("autoconv", help="autoconvolution of step profiles")
    av = ap.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    c = leaf(av, "sup", "exact sup of f*f and the ratio to (int f)^2")
    c.add_argument("--values", type=_rational_list, required=True)
    c = leaf(av, "search", "exact minimum over a quantized class")
    c.add_argument("--cells", type=int, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--budget", type=int, default=10**7)
    c = leaf(av, "young-check", "exact Young-type chain for a step profile")
    c.add_argument("--values", type=_rational_list, required=True)
    c = leaf(av, "chain", "evaluate b - 2/m - 1/(2m^2) for an external b")
    c.add_argument("--b", type=_rational, required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--target", type=_rational)

    sd = sub.add_parser("sidon", help="g-Sidon sets")
    sdv = sd.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    c = leaf(sdv, "check", "is a set g-Sidon")
    c.add_argument("--set", type=_int_list, required=True, dest="elements")
    c.add_argument("--g", type=int, default=1)
    c = leaf(sdv, "beta", "largest g-Sidon subset of {1..n}")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--g", type=int, default=1)

    c = sub.add_parser("manifest", help="print the claim-to-subcommand map")
    _global_flags(c, suppress=True)
    return parser


def expand_args_file(argv: Sequence[str]) -> list[str]:
    """Splice ``--args-file PATH`` (newline-separated flags) into ``argv``."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--args-file" or tok.startswith("--args-file="):
            path = tok.split("=", 1)[1] if "=" in tok else next(it, None)
            if path is None:
                raise UsageError("--args-file needs a path")
            try:
                text = Path(path).read_text(encoding="utf-8")
            except OSError as exc:
                raise UsageError(f"cannot read args file: {exc}") from exc
            for line in text.splitlines():
                if line.strip() and not line.lstrip().startswith("#"):
                    out.extend(shlex.split(line))
        else:
            out.append(tok)
    return out


@dataclass
class RunConfig:
    subcommand: str
    flags: dict = field(default_factory=dict)
    report_path: Path | None = None

    @classmethod
    def from_argv(cls, argv: Sequence[str]) -> "RunConfig":
        ns = build_parser().parse_args(expand_args_file(argv))
        flags = vars(ns).copy()
        command = flags.pop("command")
        verb = flags.pop("verb", None)
        report = flags.pop("report", None)
        name = command if verb is None else f"{command} {verb}"
        return cls(name, flags, report)


# ---------------------------------------------------------------------------
# handlers: flags -> (claim_id, inputs, outputs, status, extra)
# ---------------------------------------------------------------------------

Result = tuple  # (claim_id, inputs, outputs, status, extra)


def _gauss_certify(f: dict) -> Result:
    from .gauss_perimeter import NazarovParams, certify_lower_bound

    params = NazarovParams(f["a"], f["b"], f["W"], f["h"])
    cert = certify_lower_bound(params, f["target"], workers=f.get("threads", 1))
    q = cert.quadrature
    outputs = {
        "T": R.interval(q.T),
        "J": R.interval(cert.J),
        "M": R.interval(cert.M),
        "M_grid_max": R.diagnostic(cert.M_grid_max),
        "prefactor": R.interval(cert.prefactor),
        "inv_sqrt_pi": R.interval(cert.inv_sqrt_pi),
        "constant_lower": R.lower(cert.constant_lower),
        "target": R.rational(cert.target),
        "nodes": R.data(q.m + 1),
        "failing_factor": R.data(cert.failing_factor),
    }
    floor = lambda x: R._decimal(x, R._FLOOR)
    extra = {
        "params": {k: format_rational(v) for k, v in params.as_dict().items()},
        "T_lo": floor(q.T.lo),
        "J_lo": floor(q.J_lo),
        "M_hi": R._decimal(cert.M.hi, R._CEIL),
        "prefactor_lo": floor(cert.prefactor.lo),
        "constant_lower": floor(cert.constant_lower),
    }
    inputs = {**params.as_dict(), "target": cert.target}
    return "thm1-gaussian-perimeter", inputs, outputs, cert.status, extra


def _gauss_p(f: dict) -> Result:
    from .gauss_perimeter import facet_escape_p, rho_for

    n = f["n"]
    rho = Interval.from_rational(f["rho"]) if f.get("rho") is not None else rho_for(n, f["a"])
    p = facet_escape_p(n, rho, Interval.from_rational(f["r"]), alt_exponent=f["alt_exponent"])
    inputs = {"n": n, "r": f["r"], "alt_exponent": f["alt_exponent"]}
    inputs.update({"rho": f["rho"]} if f.get("rho") is not None else {"a": f["a"]})
    return "thm1-facet-escape", inputs, {"p": R.interval(p), "rho": R.interval(rho)}, "certified", {}


def _gauss_asymptote(f: dict) -> Result:
    from .gauss_perimeter import asymptote_check_p

    rows = asymptote_check_p(f["n"], f["a"], f["w"])
    outputs = {f"ratio_n{row.n}": R.interval(row.ratio) for row in rows}
    outputs.update({f"scaled_deviation_n{row.n}": R.diagnostic(row.scaled_deviation) for row in rows})
    return ("thm1-asymptote", {"n": f["n"], "a": f["a"], "w": f["w"]}, outputs, "diagnostic", {})


def _moment_ratio(f: dict) -> Result:
    from . import cube_moments as cm

    m, N = f["m"], f["N"]
    g = cm.gaussian_ratio_root(m)
    outputs = {
        "gaussian_L2_sq": R.rational(g.gaussian_L2_sq),
        "gaussian_L4_4": R.rational(g.gaussian_L4_4),
        "gaussian_ratio_sq": R.diagnostic(g.ratio_sq),
        "gaussian_root": R.diagnostic(g.root),
    }
    inputs: dict = {"m": m, "gaussian_only": f["gaussian_only"]}
    if not f["gaussian_only"]:
        inputs["N"] = N
        l1, l2_sq = cm.cube_norms(m, N)
        ratio = cm.cube_ratio(m, N)
        outputs.update({
            "cube_L1": R.rational(l1),
            "cube_L2_sq": R.rational(l2_sq),
            "cube_ratio": R.diagnostic(ratio),
            "cube_root": R.diagnostic(ratio ** (1.0 / (2 * m))),
        })
    if f["walsh_check"]:
        inputs["walsh_check"] = True
        degree = cm.walsh_degree(m, N)
        odd = cm.odd_walsh_mass(m, N)
        outputs.update({"walsh_degree": R.data(degree), "odd_walsh_mass": R.rational(odd)})
        status = "certified" if degree <= 2 * m and odd == 0 else "failed"
    else:
        status = "certified"
    return "thm2-moment-ratio", inputs, outputs, status, {}


def _slice_ratio(f: dict) -> Result:
    from .slice_khintchine import khintchine_ratio

    rep = khintchine_ratio(f["n"], f["a"])
    outputs = {
        "L1": R.rational(rep.L1),
        "L2_sq": R.rational(rep.L2_sq),
        "ratio_sq": R.rational(rep.ratio_sq),
        "c_n_sq": R.rational(rep.c_n_sq),
        "ratio": R.diagnostic(rep.ratio),
        "equality": R.data(rep.is_equality),
    }
    return ("thm3-slice-khintchine", {"n": f["n"], "a": f["a"]}, outputs,
            "certified" if rep.holds else "failed", {})


def _slice_poincare(f: dict) -> Result:
    from .slice_khintchine import poincare_check, pointwise_Lf_check

    t = poincare_check(f["n"], f["a"])
    slack = pointwise_Lf_check(f["n"], f["a"])
    outputs = {
        "variance_term": R.rational(t.lhs),
        "dirichlet_form": R.rational(t.mid),
        "norm_term": R.rational(t.rhs),
        "pointwise_min_slack": R.rational(slack),
    }
    ok = t.holds and slack >= 0
    return ("thm3-slice-poincare", {"n": f["n"], "a": f["a"]}, outputs,
            "certified" if ok else "failed", {})


def _slice_spectrum(f: dict) -> Result:
    from .slice_khintchine import ClusterError, laplacian_spectrum

    n = f["n"]
    try:
        clusters = laplacian_spectrum(n)
    except ClusterError as exc:
        return "thm3-slice-spectrum", {"n": n}, {"error": R.data(str(exc))}, "failed", {}
    outputs = {}
    for c in clusters:
        outputs[f"eigenvalue_d{c.d}"] = R.rational(c.eigenvalue)
        outputs[f"multiplicity_d{c.d}"] = R.data(c.multiplicity)
    outputs["dimension"] = R.data(sum(c.multiplicity for c in clusters))
    return "thm3-slice-spectrum", {"n": n}, outputs, "diagnostic", {}


def _slice_search(f: dict) -> Result:
    from .slice_khintchine import optimality_search

    res = optimality_search(f["n"], f["restarts"], f.get("seed", 0))
    outputs = {
        "best_ratio": R.diagnostic(res.best_ratio),
        "best_a": R.data([repr(x) for x in res.best_a]),
        "c_n": R.diagnostic(res.c_n),
        "extremizer_ratio_sq": R.rational(res.extremizer_ratio_sq),
        "matches_extremizer": R.data(res.matches_extremizer),
    }
    status = "diagnostic" if res.never_beats_c_n else "failed"
    return ("thm3-slice-search", {"n": f["n"], "restarts": f["restarts"]}, outputs, status, {})


def _autoconv_sup(f: dict) -> Result:
    from .autoconv_sidon import StepProfile, autoconv_sup

    rep = autoconv_sup(StepProfile.of(f["values"]))
    outputs = {
        "sup_conv": R.rational(rep.sup_conv),
        "mass": R.rational(rep.mass),
        "ratio": R.rational(rep.ratio),
        "argmax": R.rational(rep.argmax_knot),
    }
    return "thm4-autoconv-sup", {"values": f["values"]}, outputs, "certified", {}


def _autoconv_search(f: dict) -> Result:
    from .autoconv_sidon import quantized_min

    res = quantized_min(f["cells"], f["m"], f["budget"])
    outputs = {
        "b_value": R.rational(res.b_value),
        "chain_bound": R.rational(res.chain_bound),
        "argmin": R.data(list(res.argmin)),
        "method": R.data(res.method),
        "nodes": R.data(res.nodes),
        "completeness": R.data(res.status),
    }
    inputs = {"cells": f["cells"], "m": f["m"], "budget": f["budget"]}
    return "thm4-autoconv-search", inputs, outputs, res.status, {}


def _autoconv_young(f: dict) -> Result:
    from .autoconv_sidon import StepProfile, refined_young_check

    y = refined_young_check(StepProfile.of(f["values"]))
    outputs = {
        "conv_sup": R.rational(y.lhs),
        "linf_times_l1": R.rational(y.linf_l1),
        "half_linf_sq": R.rational(y.rhs_new),
        "linf_sq": R.rational(y.rhs_old),
        "l1": R.rational(y.l1),
        "linf": R.rational(y.linf),
    }
    return ("thm4-young", {"values": f["values"]}, outputs,
            "certified" if y.holds else "failed", {})


def _autoconv_chain(f: dict) -> Result:
    from .autoconv_sidon import chain

    ch = chain(f["b"], f["m"])
    outputs = {
        "refined_bound": R.rational(ch.refined),
        "original_bound": R.rational(ch.original),
        "refined_bound_decimal": R.diagnostic(float(ch.refined)),
        "b_source": R.data(ch.label),
    }
    inputs: dict = {"b": f["b"], "m": f["m"]}
    status = "diagnostic"
    if f.get("target") is not None:
        inputs["target"] = f["target"]
        outputs["meets_target"] = R.data(ch.meets(f["target"]))
        status = "diagnostic" if ch.meets(f["target"]) else "failed"
    return "thm4-chain", inputs, outputs, status, {}


def _sidon_check(f: dict) -> Result:
    from .autoconv_sidon import COUNTING_CONVENTION, is_g_sidon, representation_counts

    A = sorted(set(f["elements"]))
    ok = is_g_sidon(A, f["g"])
    unordered = representation_counts(A)
    ordered = representation_counts(A, ordered=True)
    outputs = {
        "is_g_sidon": R.data(ok),
        "max_representations": R.data(max(unordered.values())),
        "max_ordered_representations": R.data(max(ordered.values())),
        "convention": R.data(COUNTING_CONVENTION),
    }
    status = "certified" if ok else "failed"
    return "defs-sidon-check", {"set": A, "g": f["g"]}, outputs, status, {}


def _sidon_beta(f: dict) -> Result:
    from .autoconv_sidon import COUNTING_CONVENTION, beta_g

    size, witness = beta_g(f["n"], f["g"])
    outputs = {
        "beta": R.data(size),
        "witness": R.data(list(witness)),
        "convention": R.data(COUNTING_CONVENTION),
    }
    return "defs-sidon-beta", {"n": f["n"], "g": f["g"]}, outputs, "certified", {}


def _manifest(f: dict) -> Result:
    outputs = {cid: R.data({"command": cmd, "semantics": what}) for cid, cmd, what in MANIFEST}
    return "manifest", {}, outputs, "diagnostic", {}


HANDLERS: dict[str, Callable[[dict], Result]] = {
    "gauss-perimeter certify": _gauss_certify,
    "gauss-perimeter p": _gauss_p,
    "gauss-perimeter asymptote": _gauss_asymptote,
    "moment-ratio": _moment_ratio,
    "slice ratio": _slice_ratio,
    "slice poincare": _slice_poincare,
    "slice spectrum": _slice_spectrum,
    "slice search": _slice_search,
    "autoconv sup": _autoconv_sup,
    "autoconv search": _autoconv_search,
    "autoconv young-check": _autoconv_young,
    "autoconv chain": _autoconv_chain,
    "sidon check": _sidon_check,
    "sidon beta": _sidon_beta,
    "manifest": _manifest,
}

_SEEDED = {"slice search"}


def run(config: RunConfig) -> tuple[R.Certificate, int]:
    """Dispatch one claim, write its report if requested, and return the exit code."""
    handler = HANDLERS.get(config.subcommand)
    if handler is None:
        raise UsageError(f"unknown subcommand {config.subcommand!r}")
    flags = {"threads": 1, "seed": 0, **config.flags}
    t0 = time.perf_counter()
    claim_id, inputs, outputs, status, extra = handler(flags)
    elapsed = int(round((time.perf_counter() - t0) * 1000))
    cert = R.Certificate(
        claim_id=claim_id, inputs=inputs, outputs=outputs, status=status,
        tool_version=__version__,
        seed=flags["seed"] if config.subcommand in _SEEDED else None,
        wall_time_ms=elapsed, extra=extra,
    )
    if config.report_path is not None:
        cert.write(config.report_path, timing=bool(flags.get("timing")))
    return cert, cert.exit_code


def _summary(cert: R.Certificate) -> str:
    lines = [f"{cert.claim_id}: {cert.status}"]
    for name, out in cert.outputs.items():
        if out["kind"] == "interval":
            val = f"[{out['lo']}, {out['hi']}]"
        else:
            val = out["value"]
        lines.append(f"  {name} = {val}")
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = RunConfig.from_argv(argv)
        if config.subcommand == "manifest":
            sys.stdout.write(manifest())
            if config.report_path is None:
                return R.EXIT_OK
        cert, code = run(config)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return R.EXIT_ERROR
    except (ValueError, ArithmeticError, OverflowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return R.EXIT_ERROR
    if config.subcommand != "manifest":
        print(_summary(cert))
    return code


if __name__ == "__main__":
    sys.exit(main())
