"""Finite-horizon evaluation of the systole integral along a flow track."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import BadParams
from ..teich import holonomy_length_at
from .saddle import DEFAULT_NODE_CAP, Box, as_mesh, enumerate_saddle_connections, shortest_saddle_connection
from .systole import systole_estimate

DIVERGES = "DivergesLinearly"
CONVERGES = "ConvergesNumerically"
INCONCLUSIVE = "Inconclusive"

ENVELOPE_T_MAX = 6.0


@dataclass
class CriterionReport:
    rows: list = field(default_factory=list)  # (t, kappa, delta_sc, d_t, integrand, integral)
    verdict_hint: str = INCONCLUSIVE

    @property
    def integral(self):
        return self.rows[-1][5] if self.rows else 0.0

    def column(self, name):
        k = ("t", "kappa", "delta_sc", "d_t", "integrand", "integral").index(name)
        return [r[k] for r in self.rows]


def trapezoid_running(ts, ys):
    """Running trapezoid integral of ``ys`` over ``ts``."""
    out = [0.0]
    for k in range(1, len(ts)):
        out.append(out[-1] + 0.5 * (ts[k] - ts[k - 1]) * (ys[k] + ys[k - 1]))
    return out


def delta_envelope(surface, ts, node_cap=DEFAULT_NODE_CAP):
    """Shortest saddle-connection length at each ``t`` in ``ts`` from one enumeration.

    Connections of length at most ``M`` at some time in ``[0, T]`` have holonomy
    inside the box ``|x| <= M e^T``, ``|y| <= M`` at time 0.  ``M`` is enlarged
    until every requested time sees a connection no longer than ``M``.
    """
    ts = list(ts)
    if not ts:
        return []
    mesh = as_mesh(surface)
    T = max(max(ts), 0.0)
    M = shortest_saddle_connection(mesh, node_cap)[0]
    while True:
        scs = enumerate_saddle_connections(mesh, 0, node_cap, region=Box(M * math.exp(T), M))
        hol = {(round(sc.holonomy[0], 12), round(sc.holonomy[1], 12)) for sc in scs}
        best = [min((holonomy_length_at(v, t) for v in hol), default=math.inf) for t in ts]
        if max(best) <= M * (1 + 1e-9):
            return best
        # the current minima bound every Delta_t from above, so one more pass is exact
        M = max(best) * (1 + 1e-9) if math.isfinite(max(best)) else 2 * M


def _verdict(ys):
    n = len(ys)
    if n < 4:
        return INCONCLUSIVE
    q = max(1, n // 4)
    first = sum(ys[:q]) / q
    last = ys[-q:]
    if first > 0 and sum(last) / q >= 0.5 * first:
        return DIVERGES
    if last[-1] < 1e-4 and all(b <= a for a, b in zip(last, last[1:])):
        return CONVERGES
    return INCONCLUSIVE


def criterion_integral(track, depth=2, node_cap=DEFAULT_NODE_CAP, envelope_until=ENVELOPE_T_MAX,
                       treat_marked_as_singular=True):
    """Sampled ``kappa(t)``, ``Delta_t`` and the running integral of ``kappa(t)^2``.

    ``kappa`` is estimated on each normalised sample.  ``Delta_t`` comes from the
    envelope over connections of the base surface for ``t <= envelope_until`` and
    from re-enumeration on the sample beyond.
    """
    ts = [t for t, _, _ in track.samples]
    env_ts = [t for t in ts if t <= envelope_until + 1e-12]
    env = delta_envelope(track.base_surface, env_ts, node_cap) if env_ts else []
    kappas, deltas = [], []
    for k, (t, s, _) in enumerate(track.samples):
        est = systole_estimate(s, depth, treat_marked_as_singular, node_cap)
        kappas.append(est.value)
        deltas.append(env[k] if k < len(env) else shortest_saddle_connection(s, node_cap)[0])
    ys = [k * k for k in kappas]
    run = trapezoid_running(ts, ys)
    rows = [(t, kp, d, -math.log(d), y, I) for t, kp, d, y, I in zip(ts, kappas, deltas, ys, run)]
    return CriterionReport(rows, _verdict(ys))


# -- thick-thin integral ----------------------------------------------------------

@dataclass
class Theorem3Report:
    rows: list = field(default_factory=list)  # (t, C, sumD, delta, integrand, integral, cond1, cond2)
    eta: float = 0.0
    kappas: list = field(default_factory=list)
    decompositions: list = field(default_factory=list, repr=False)

    @property
    def integral(self):
        return self.rows[-1][5] if self.rows else 0.0


def thick_thin_integrand(eps, sum_d, C, delta):
    """``(sum_i D_i / eps^2 + (C - 1)/delta)^-2``; the second term vanishes when ``C = 1``."""
    term = sum_d / (eps * eps)
    if C > 1:
        term += (C - 1) / delta
    return term ** -2


def theorem3_report(track, eta, eps_schedule, h=None, with_systole=False, depth=2,
                    treat_marked_as_singular=True):
    """Per-sample decomposition quantities and the running thick-thin integral.

    ``eps_schedule`` is a positive number or a function of ``t``; ``h`` defaults
    to a tenth of the current ``eps``.  Condition 1 asks for removed area below
    ``eta``; condition 2 (boundary clearance above ``eps``) holds by construction.
    """
    from .decomposition import thick_thin_decomposition

    if not eta > 0:
        raise BadParams("eta must be positive")
    eps_of = eps_schedule if callable(eps_schedule) else (lambda t: float(eps_schedule))
    ts, ys, raw, decs, kappas = [], [], [], [], []
    for t, s, _ in track.samples:
        eps = eps_of(t)
        if not eps > 0:
            raise BadParams(f"eps must be positive, got {eps} at t={t}")
        dec = thick_thin_decomposition(s, eps, h if h is not None else eps / 10, treat_marked_as_singular)
        y = thick_thin_integrand(eps, dec.sum_diameters, dec.C, dec.delta)
        ts.append(t)
        ys.append(y)
        raw.append((t, dec.C, dec.sum_diameters, dec.delta, y, dec.removed_area < eta, True))
        decs.append(dec)
        if with_systole:
            kappas.append(systole_estimate(s, depth, treat_marked_as_singular).value)
    run = trapezoid_running(ts, ys)
    rows = [(t, C, sd, d, y, I, c1, c2) for (t, C, sd, d, y, c1, c2), I in zip(raw, run)]
    return Theorem3Report(rows, float(eta), kappas, decs)
