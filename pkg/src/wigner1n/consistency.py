"""Cross-route checks on the 1/N correction.

Normalisation used by every check: the 1/N coefficient of the scaled
moment ``m_p`` equals the p-th moment of ``rho_Q + rho_R#``, and since
``<Tr X^p> = N**(p/2 + 1) * m_p`` it is also the coefficient of
``N**(p/2)`` in the exact trace.  No route is sign-flipped.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from . import analytic, series
from .ensembles import EnsembleSpec, make_general_ensemble
from .exact_moments import subleading_coefficients
from .spectra import estimate_scaled_moment, fit_one_over_N

__all__ = [
    "CheckReport",
    "MCConfig",
    "SIGN_CONVENTION",
    "as_fraction",
    "contradiction_report",
    "corrected_report",
    "monte_carlo_checks",
    "reports_to_json",
]

QUAD_TOL = 1e-6
AGREE_TOL = 1e-8
MC_SIGMAS = 4.0

SIGN_CONVENTION = (
    "1/N coefficient of m_p = p-th moment of rho_Q + rho_R# = "
    "coefficient of N^(p/2) in <Tr X^p>"
)


def as_fraction(x) -> Fraction:
    """Exact rational for ints/Fractions; floats by their shortest repr."""
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite parameter {x!r}")
        return Fraction(repr(x))
    return Fraction(x)


def _num(x):
    # JSON-friendly: exact rationals become "p/q" strings only when not integral
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    return float(x)


@dataclass
class CheckReport:
    check_id: str
    routes: dict
    expected: str
    delta: float
    passed: bool
    tolerance: float
    note: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["routes"] = {k: _num(v) for k, v in self.routes.items()}
        d["delta"] = _num(self.delta)
        d["pass"] = d.pop("passed")
        return d


def _equal(check_id, routes, a, b, tol, rel=True, note=""):
    delta = a - b
    if tol == 0:
        ok = delta == 0
    else:
        scale = max(1.0, abs(float(b))) if rel else 1.0
        ok = abs(float(delta)) <= tol * scale
    return CheckReport(check_id, routes, "equal", delta, bool(ok), tol, note)


def _unequal_by(check_id, routes, a, b, gap, tol, note=""):
    delta = a - b
    ok = abs(float(delta) - float(gap)) <= tol
    return CheckReport(check_id, routes, f"unequal-by({gap})", delta, bool(ok), tol, note)


def contradiction_report(w: float) -> list[CheckReport]:
    """Reproduce the mismatch between the inconsistent density and its resolvent.

    The density integrates to -3/4 and has second moment -3w^2, while the
    series of its claimed resolvent starts at 1/x^5, so both moments are 0
    on that route.
    """
    if not w > 0:
        raise ValueError("w must be positive")
    wf = as_fraction(w)
    rho = analytic.make_density("R_incorrect", float(w))
    s = series.expand_form("GR_incorrect")
    m_series = series.moments_from_series(s, wf, 4)
    out = []
    for k, ref in ((0, Fraction(-3, 4)), (2, -3 * wf ** 2)):
        quad = analytic.measure_moment(rho, k)
        tol = QUAD_TOL * float(wf ** k)
        exact = m_series[k]
        out.append(
            _equal(f"contradiction.k{k}.quadrature", {"quadrature": quad, "reference": ref},
                   quad, float(ref), tol, rel=False)
        )
        out.append(
            _equal(f"contradiction.k{k}.series", {"series": exact, "reference": Fraction(0)},
                   exact, Fraction(0), 0)
        )
        out.append(
            _unequal_by(
                f"contradiction.k{k}.mismatch",
                {"series": exact, "quadrature": quad, "expected_delta": -ref},
                exact, quad, -ref, tol,
                note="density and resolvent disagree",
            )
        )
    return out


@dataclass
class MCConfig:
    Ns: tuple = (64, 128, 256, 512)
    samples: int = 40_000
    seed: int = 20170101
    powers: tuple = (4,)
    workers: int = 1
    ensemble: EnsembleSpec | None = None
    sigmas: float = MC_SIGMAS


def _density_routes(w, v2, kappa4, max_k=4):
    rho = analytic.make_density("Q", float(w)) + analytic.make_density(
        "R_general", float(w), float(v2), float(kappa4)
    )
    quad = {k: analytic.measure_moment(rho, k) for k in range(max_k + 1)}
    pieces = series.expand_form("GQ") + series.expand_form(
        "GR_general", v2_ratio=v2 / w ** 2, kappa4_ratio=kappa4 / w ** 4
    )
    ser = series.moments_from_series(pieces, w, max(max_k, 6))
    return rho, quad, ser


def corrected_report(w, v2, kappa4, mc_config: MCConfig | None = None) -> list[CheckReport]:
    """Agreement of the corrected 1/N term across independent routes."""
    wf, v2f, k4f = as_fraction(w), as_fraction(v2), as_fraction(kappa4)
    if not wf > 0:
        raise ValueError("w must be positive")
    if v2f < 0:
        raise ValueError("v2 must be nonnegative")
    if k4f < -2 * wf ** 4:
        raise ValueError("kappa4 must be >= -2 w^4")
    rho, quad, ser = _density_routes(wf, v2f, k4f)
    out = []
    for k in range(5):
        out.append(
            _equal(f"corrected.moment.k{k}", {"quadrature": quad[k], "series": ser[k]},
                   quad[k], ser[k], AGREE_TOL)
        )
    for p in (2, 4, 6):
        _, sub = subleading_coefficients(p, wf ** 2, v2f, k4f)
        q = quad.get(p)
        if q is None:
            q = analytic.measure_moment(rho, p)
        out.append(
            _equal(f"corrected.trace.p{p}.series", {"trace_subleading": sub, "series": ser[p]},
                   ser[p], sub, 0, note=SIGN_CONVENTION)
        )
        out.append(
            _equal(f"corrected.trace.p{p}.quadrature", {"trace_subleading": sub, "quadrature": q},
                   q, float(sub), AGREE_TOL, note=SIGN_CONVENTION)
        )
    if mc_config is not None:
        out.extend(monte_carlo_checks(wf, v2f, k4f, mc_config))
    return out


def monte_carlo_checks(w, v2, kappa4, cfg: MCConfig) -> list[CheckReport]:
    """Fit ``m_p ~ c0 + c1/N`` to sampled moments; compare with the traces."""
    spec = cfg.ensemble or make_general_ensemble(float(w ** 2), float(kappa4), float(v2))
    out = []
    for p in cfg.powers:
        lead, sub = subleading_coefficients(p, w ** 2, v2, kappa4)
        pts = []
        for N in cfg.Ns:
            est = estimate_scaled_moment(spec, N, p, cfg.samples, cfg.seed, cfg.workers)
            pts.append((N, est.mean, est.stderr))
        fit = fit_one_over_N(pts)
        routes = {"c0": fit.c0, "c0_stderr": fit.c0_stderr, "c1": fit.c1,
                  "c1_stderr": fit.c1_stderr, "trace_leading": lead, "trace_subleading": sub}
        note = f"seed={cfg.seed} samples={cfg.samples} Ns={list(cfg.Ns)}"
        for name, value, ref, se in (("c0", fit.c0, lead, fit.c0_stderr),
                                     ("c1", fit.c1, sub, fit.c1_stderr)):
            delta = value - float(ref)
            ok = abs(delta) <= cfg.sigmas * se
            out.append(CheckReport(f"corrected.monte_carlo.p{p}.{name}", dict(routes),
                                   "equal", delta, bool(ok), cfg.sigmas * se, note))
    return out


def reports_to_json(reports: list[CheckReport], **meta) -> str:
    payload = {"checks": [r.to_dict() for r in reports], "all_pass": all(r.passed for r in reports)}
    payload.update(meta)
    return json.dumps(payload, indent=2, sort_keys=False)
