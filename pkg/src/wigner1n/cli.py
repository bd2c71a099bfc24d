"""Command-line front end.

Usage::

    wigner1n verify --w 1 [--with-mc --samples 40000] [--out report.json]
    wigner1n density --w 1 --out densities/
    wigner1n moments --ensemble sign --w 1 --N 5 --p 8
    wigner1n sample --ensemble goe --w 1 --N 256 --samples 50 --bins 64 --out run/

Exit codes: 0 success, 1 a check failed, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analytic, consistency, exact_moments, series
from .ensembles import make_general_ensemble, make_goe, make_sign_ensemble, sample_matrix
from .exact_moments import MomentSequence
from .spectra import eigenvalues, empirical_density, estimate_scaled_moment

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wigner1n", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, ensemble=False):
        p.add_argument("--w", type=_rational, default=Fraction(1), help="off-diagonal std w")
        p.add_argument("--v2", type=_rational, default=None, help="diagonal variance")
        p.add_argument("--kappa4", type=_rational, default=None, help="off-diagonal 4th cumulant")
        p.add_argument("--seed", type=int, default=20170101)
        p.add_argument("--out", type=Path, default=None)
        if ensemble:
            p.add_argument("--ensemble", choices=("sign", "goe", "general"), default="sign")

    p = sub.add_parser("verify", help="run contradiction and corrected-route checks")
    common(p)
    p.add_argument("--with-mc", action="store_true", help="include the Monte Carlo 1/N fit")
    p.add_argument("--samples", type=_positive_int, default=40_000)
    p.add_argument("--N", type=_positive_int, action="append", dest="Ns")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("density", help="export density curves and atom table")
    common(p)
    p.add_argument("--points", type=_positive_int, default=401)

    p = sub.add_parser("moments", help="trace moments across routes")
    common(p, ensemble=True)
    p.add_argument("--N", type=_positive_int, action="append", dest="Ns")
    p.add_argument("--p", type=_positive_int, action="append", dest="ps")
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo samples (0: skip)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("sample", help="sample matrices, dump eigenvalues and histogram")
    common(p, ensemble=True)
    p.add_argument("--N", type=_positive_int, default=64)
    p.add_argument("--samples", type=_positive_int, default=10)
    p.add_argument("--bins", type=_positive_int, default=64)
    return parser


def _check_triple(w, v2, k4):
    if w <= 0:
        raise _Usage("--w must be positive")
    if v2 < 0:
        raise _Usage("--v2 must be nonnegative")
    if k4 < -2 * w ** 4:
        raise _Usage("--kappa4 must be >= -2 w^4")
    return w, v2, k4


def _user_triple(args, v2_default, k4_default):
    """(w, v2, kappa4) from explicit flags, falling back to the defaults."""
    v2 = args.v2 if args.v2 is not None else v2_default
    k4 = args.kappa4 if args.kappa4 is not None else k4_default
    return _check_triple(args.w, v2, k4)


def _params(args):
    """(w, v2, kappa4) implied by --ensemble and the parameter flags."""
    w = args.w
    if w <= 0:
        raise _Usage("--w must be positive")
    if args.ensemble == "sign":
        return _check_triple(w, Fraction(0), -2 * w ** 4)
    if args.ensemble == "goe":
        return _check_triple(w, 2 * w ** 2, Fraction(0))
    if args.v2 is None or args.kappa4 is None:
        raise _Usage("--v2 and --kappa4 are required for the general ensemble")
    return _check_triple(w, args.v2, args.kappa4)


class _Usage(Exception):
    pass


def _ensemble(name, w, v2, k4):
    if name == "sign":
        return make_sign_ensemble(float(w))
    if name == "goe":
        return make_goe(float(w))
    return make_general_ensemble(float(w ** 2), float(k4), float(v2))


def _exact_sequences(name, w, v2, k4, max_p=8):
    """Exact moment sequences of the entry laws that ``_ensemble`` samples."""
    w2 = w ** 2
    if name == "sign":
        return MomentSequence.sign(w, max_p), MomentSequence.zero(max_p)
    if name == "goe":
        df = [1, 1, 3, 15, 105]
        off = {2 * k: df[k] * w2 ** k for k in range(1, max_p // 2 + 1)}
        dia = {2 * k: df[k] * (2 * w2) ** k for k in range(1, max_p // 2 + 1)}
        return MomentSequence(off), MomentSequence(dia)
    # three-point laws: <x^2k> = 2p a^2k
    a2 = (k4 + 3 * w2 ** 2) / w2
    off = {2 * k: w2 * a2 ** (k - 1) for k in range(1, max_p // 2 + 1)}
    if v2 == 0:
        dia = MomentSequence.zero(max_p)
    else:
        dia = MomentSequence({2 * k: Fraction(1, 3) * (3 * v2) ** k for k in range(1, max_p // 2 + 1)})
    return MomentSequence(off), dia


def _write_text(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    path.write_text(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def cmd_verify(args) -> int:
    w = _check_triple(args.w, 0, 0)[0]
    reports = consistency.contradiction_report(w)
    triples = {
        "sign": (Fraction(0), -2 * w ** 4),
        "goe": (2 * w ** 2, Fraction(0)),
        "generic": (w ** 2, w ** 4 / 2),
    }
    if args.v2 is not None or args.kappa4 is not None:
        _, v2, k4 = _user_triple(args, Fraction(0), Fraction(0))
        triples["user"] = (v2, k4)
    for name, (v2, k4) in triples.items():
        for r in consistency.corrected_report(w, v2, k4):
            r.check_id = f"{name}.{r.check_id}"
            reports.append(r)
    if args.with_mc:
        cfg = consistency.MCConfig(samples=args.samples, seed=args.seed, workers=args.workers,
                                   ensemble=make_sign_ensemble(float(w)))
        if args.Ns:
            cfg.Ns = tuple(args.Ns)
        reports.extend(consistency.monte_carlo_checks(w, Fraction(0), -2 * w ** 4, cfg))

    if args.format == "json":
        text = consistency.reports_to_json(reports, w=str(w), seed=args.seed,
                                           convention=consistency.SIGN_CONVENTION) + "\n"
    else:
        rows = [
            (r.check_id, r.expected, json.dumps({k: _fmt(v) for k, v in r.routes.items()}),
             r.delta, str(r.passed).lower(), r.tolerance)
            for r in reports
        ]
        text = _csv_text(["check_id", "expected", "routes", "delta", "pass", "tolerance"], rows)
    _write_text(args.out, text)
    failed = [r.check_id for r in reports if not r.passed]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_density(args) -> int:
    w, v2, k4 = _user_triple(args, Fraction(0), -2 * args.w ** 4)
    outdir = args.out or Path(".")
    outdir.mkdir(parents=True, exist_ok=True)
    analytic.write_density_csv(outdir / "density.csv", float(w), args.points, float(v2), float(k4))
    analytic.write_atoms_csv(outdir / "atoms.csv", analytic.make_density("Q", float(w)))
    return EXIT_OK


def _moment_rows(args):
    w, v2, k4 = _params(args)
    ens = args.ensemble
    off, dia = _exact_sequences(ens, w, v2, k4)
    zero_diag = all(dia[p] == 0 for p in range(2, 9, 2))
    Ns = args.Ns or [8]
    ps = args.ps or [2, 4, 6]
    rows = []
    for N in Ns:
        for p in ps:
            if zero_diag and p <= 8:
                rows.append((N, p, "closed_form", exact_moments.cicuta_trace_J(N, p, off), 0))
            elif p <= 6:
                rows.append((N, p, "closed_form", exact_moments.general_trace_S(N, p, off, dia), 0))
            if N ** p <= exact_moments.ENUMERATION_BUDGET:
                rows.append((N, p, "brute_force", exact_moments.brute_force_trace(N, p, off, dia), 0))
            if p % 2 == 0 and p <= 10:
                # two leading orders in N from the series and quadrature routes
                lead = series.moments_from_series(series.semicircle_g_series(), w)[p]
                pieces = series.expand_form("GQ") + series.expand_form(
                    "GR_general", v2_ratio=v2 / w ** 2, kappa4_ratio=k4 / w ** 4)
                sub = series.moments_from_series(pieces, w)[p]
                scale = Fraction(N) ** (p // 2 + 1)
                rows.append((N, p, "series", scale * (lead + sub / N), 0))
                if p <= 16:
                    rho = analytic.make_density("Q", float(w)) + analytic.make_density(
                        "R_general", float(w), float(v2), float(k4))
                    lead_q = analytic.measure_moment(analytic.make_density("W0", float(w)), p)
                    sub_q = analytic.measure_moment(rho, p)
                    rows.append((N, p, "quadrature", float(scale) * (lead_q + sub_q / N), 0))
            if args.samples >= 2:
                spec = _ensemble(ens, w, v2, k4)
                est = estimate_scaled_moment(spec, N, p, args.samples, args.seed)
                scale = N ** (1 + p / 2)
                rows.append((N, p, "monte_carlo", est.mean * scale, est.stderr * scale))
    return rows


def cmd_moments(args) -> int:
    rows = _moment_rows(args)
    header = ["N", "p", "route", "value", "stderr"]
    if args.format == "csv":
        text = _csv_text(header, rows)
    else:
        text = json.dumps([dict(zip(header, (r[0], r[1], r[2], _fmt(r[3]), _fmt(r[4]))))
                           for r in rows], indent=2) + "\n"
    _write_text(args.out, text)
    return EXIT_OK


def cmd_sample(args) -> int:
    w, v2, k4 = _params(args)
    spec = _ensemble(args.ensemble, w, v2, k4)
    N = args.N
    eig_rows, pooled = [], []
    for s in range(args.samples):
        ev = eigenvalues(sample_matrix(spec, N, args.seed, s))
        pooled.append(ev)
        eig_rows.extend((s, i, x) for i, x in enumerate(ev))
    wf = float(w)
    hist = empirical_density(np.concatenate(pooled), N, args.bins, (-2 * wf - 0.5, 2 * wf + 0.5))
    outdir = args.out or Path(".")
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "eigenvalues.csv").write_text(_csv_text(["sample", "index", "eigenvalue"], eig_rows))
    hist_rows = zip(hist.edges[:-1], hist.edges[1:], hist.heights)
    (outdir / "histogram.csv").write_text(_csv_text(["lo", "hi", "height"], hist_rows))
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "density": cmd_density, "moments": cmd_moments, "sample": cmd_sample}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except exact_moments.EnumerationBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
