"""Command-line front end: ``wiretap-exp {exponent,sweep,verify,simulate}``.

Exit codes: 0 success, 1 validation error, 2 failed check, 3 resource cap.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__
from . import checks
from .ensemble_sim import empirical_exponent
from .exponents import gallager_er, secrecy_exponent
from .prob_core import ProbabilityError, mutual_information
from .specfile import SpecError, load
from .type_oracle import CapExceeded

EXIT_OK, EXIT_VALIDATION, EXIT_CHECK, EXIT_CAP = 0, 1, 2, 3
LN2 = math.log(2.0)


class _Units:
    def __init__(self, bits: bool):
        self.bits = bits
        self.name = "bits" if bits else "nats"

    def rate_in(self, r: float | None) -> float | None:
        return None if r is None else (r * LN2 if self.bits else r)

    def out(self, v: float) -> float:
        return v / LN2 if self.bits else v


def _fmt(v: float) -> str:
    if v is None:
        return ""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def _header(spec, **extra) -> list[str]:
    lines = [f"# wiretap-exponents {__version__}", f"# spec_sha256_16: {spec.source_hash}"]
    lines += [f"# {k}: {v}" for k, v in extra.items()]
    return lines


def _write(out_path: str, text: str) -> None:
    if out_path == "-":
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8", newline="")


def _rate_pairs(spec, args, units) -> list[tuple[float | None, float]]:
    if args.r_prime is not None:
        return [(units.rate_in(args.r), units.rate_in(args.r_prime))]
    if spec.rates:
        return list(spec.rates)  # spec files always carry nats
    raise SpecError("no rate given: pass --r-prime or add 'rates' to the spec file")


def cmd_exponent(args) -> int:
    spec = load(args.spec)
    units = _Units(args.bits)
    inst = spec.instance()
    i_xz = mutual_information(inst.p_x, inst.w)
    i_xy = mutual_information(inst.p_x, inst.v)
    reports = []
    for r, rp in _rate_pairs(spec, args, units):
        es = secrecy_exponent(inst.p_x, inst.w, rp)
        rec = {
            "units": units.name,
            "I_XZ": units.out(i_xz),
            "I_XY": units.out(i_xy),
            "R_prime": units.out(rp),
            "E_s": units.out(es.value),
            "arg_lambda": es.arg_lambda,
        }
        if r is not None:
            er = gallager_er(inst.p_x, inst.v, r + rp)
            rec.update(R=units.out(r), E_r=units.out(er.value), arg_rho=er.arg_lambda)
        reports.append(rec)
    if args.json:
        sys.stdout.write(json.dumps(reports if len(reports) > 1 else reports[0], indent=2) + "\n")
    else:
        for rec in reports:
            sys.stdout.write(f"I(X;Z) = {_fmt(rec['I_XZ'])} {units.name}\n")
            sys.stdout.write(f"I(X;Y) = {_fmt(rec['I_XY'])} {units.name}\n")
            sys.stdout.write(f"R' = {_fmt(rec['R_prime'])}  E_s = {_fmt(rec['E_s'])}  arg lambda = {_fmt(rec['arg_lambda'])}\n")
            if "E_r" in rec:
                sys.stdout.write(f"R = {_fmt(rec['R'])}  E_r(R+R') = {_fmt(rec['E_r'])}  arg rho = {_fmt(rec['arg_rho'])}\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.steps < 2:
        raise SpecError("--steps must be at least 2")
    spec = load(args.spec)
    units = _Units(args.bits)
    inst = spec.instance()
    lo, hi = units.rate_in(args.r_prime_min), units.rate_in(args.r_prime_max)
    if not hi > lo:
        raise SpecError("--r-prime-max must exceed --r-prime-min")
    r = units.rate_in(args.r)
    buf = io.StringIO()
    buf.write("\n".join(_header(spec, units=units.name, I_XZ=_fmt(units.out(mutual_information(inst.p_x, inst.w))))) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    cols = ["r_prime", "e_s", "arg_lambda"] + (["e_r_at_r_plus_r_prime"] if r is not None else [])
    writer.writerow(cols)
    for k in range(args.steps):
        rp = lo + (hi - lo) * k / (args.steps - 1)
        es = secrecy_exponent(inst.p_x, inst.w, rp)
        row = [_fmt(units.out(rp)), _fmt(units.out(es.value)), _fmt(es.arg_lambda)]
        if r is not None:
            row.append(_fmt(units.out(gallager_er(inst.p_x, inst.v, r + rp).value)))
        writer.writerow(row)
    _write(args.out, buf.getvalue())
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = load(args.spec)
    results = checks.run_all(spec.instance(), args.level)
    width = max(len(c.name) for c in results)
    for c in results:
        mark = "PASS" if c.passed else "FAIL"
        sys.stdout.write(f"{mark}  {c.name:<{width}}  gap={c.gap:.3e}  tol={c.tolerance:.1e}  {c.detail}\n")
    failed = sum(not c.passed for c in results)
    sys.stdout.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return EXIT_OK if failed == 0 else EXIT_CHECK


def cmd_simulate(args) -> int:
    spec = load(args.spec)
    units = _Units(args.bits)
    n_list = [int(s) for s in str(args.n).split(",") if s.strip()]
    if not n_list or min(n_list) < 1:
        raise SpecError("--n needs positive blocklengths, e.g. 4,6,8")
    rp = units.rate_in(args.r_prime)
    if rp is None and args.m_prime is None:
        if not spec.rates:
            raise SpecError("give --m-prime, --r-prime, or 'rates' in the spec file")
        rp = spec.rates[0][1]
    inst = spec.instance(rate_prime=rp or 0.0)
    points = empirical_exponent(
        inst, n_list, args.replicates, args.seed, m_prime_cap=args.m_prime_cap, m_prime=args.m_prime, workers=args.workers
    )
    buf = io.StringIO()
    buf.write(
        "\n".join(
            _header(
                spec,
                seed=args.seed,
                replicates=args.replicates,
                M=args.m if args.m is not None else "1 (message 1 only)",
                units=units.name,
                e_s_reference="E_s at the simulated rate ln(M')/n",
                m_prime_by_n=" ".join(f"{p.n}:{p.m_prime}" for p in points),
            )
        )
        + "\n"
    )
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "mean_divergence", "std_error", "empirical_exponent", "e_s_reference"])
    for p in points:
        ref = secrecy_exponent(inst.p_x, inst.w, math.log(p.m_prime) / p.n).value
        writer.writerow(
            [p.n, _fmt(units.out(p.estimate)), _fmt(units.out(p.std_error)),
             _fmt(units.out(p.exponent)), _fmt(units.out(ref))]
        )
    _write(args.out, buf.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wiretap-exp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("spec", help="channel spec JSON file")
        p.add_argument("--bits", action="store_true", help="read and print rates/exponents in bits")

    p = sub.add_parser("exponent", help="I(X;Z), I(X;Y), E_s and E_r at given rates")
    common(p)
    p.add_argument("--r-prime", type=float, help="randomization rate R'")
    p.add_argument("--r", type=float, help="message rate R (adds E_r(R+R'))")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("sweep", help="E_s over a grid of R' values, as CSV")
    common(p)
    p.add_argument("--r-prime-min", type=float, required=True)
    p.add_argument("--r-prime-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=51)
    p.add_argument("--r", type=float, help="message rate R (adds an E_r column)")
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the oracle cross-checks")
    common(p)
    p.add_argument("--level", choices=["fast", "full"], default="fast")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="Monte Carlo leakage divergence and empirical exponents, as CSV")
    common(p)
    p.add_argument("--n", default="4,6,8", help="comma-separated blocklengths")
    p.add_argument("--m", type=int, help="number of messages (recorded; leakage uses message 1)")
    p.add_argument("--m-prime", type=int, help="codewords per message; default ceil(exp(n R'))")
    p.add_argument("--m-prime-cap", type=int, help="upper limit on M'")
    p.add_argument("--r-prime", type=float, help="randomization rate R'")
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, ProbabilityError) as exc:
        sys.stderr.write(f"{args.spec}: {exc}\n")
        return EXIT_VALIDATION
    except (CapExceeded, MemoryError) as exc:
        sys.stderr.write(f"resource cap: {exc}\n")
        return EXIT_CAP
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
