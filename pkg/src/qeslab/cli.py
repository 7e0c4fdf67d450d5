"""Batch command-line front end.

Every subcommand prints (or writes with ``--out``) one JSON document or CSV
table. The fully resolved parameters are echoed in the ``params`` block (JSON)
or as ``#`` comment lines above the CSV header. Exit status: 0 on success,
1 on domain errors (a JSON error object goes to stderr), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from datetime import datetime, timezone
from fractions import Fraction
from importlib import resources

import numpy as np

from . import __version__
from .algebra import format_rat, parse_rat
from .errors import QesError
from .models import (
    PRINTED_KINK,
    PRINTED_BHADURI,
    PRINTED_KINK_EVEN,
    PRINTED_KINK_ODD,
    BhaduriParams,
    KinkParams,
    bhaduri_radial_problem,
    bhaduri_recurrence,
    build_bhaduri_ode,
    build_kink_t_ode,
    kink_potential,
    kink_qes_states,
    kink_sectors,
    periodic_potential,
    periodic_qes_states,
    reconstruct_wavefunction,
    recurrence_diff,
)
from .numerics import Grid, residual_report, solve, solve_richardson, table_csv
from .recurrences import (
    CHEBYSHEV_SEED,
    best_effort_moments,
    chebyshev_like_recurrence,
    favard_check,
    generate_sequence,
    gram_matrix,
    moments_from_sequence,
    monic_hermite_recurrence,
    probe_orthogonality,
    truncation_scan,
)
from .series import SeriesAnsatz, derive_recurrence, hermite_ode

SCHEMA_VERSION = 1

FAMILY_MODELS = ("kink-even", "kink-odd", "kink-even-printed", "kink-odd-printed",
                 "bhaduri", "bhaduri-printed", "hermite", "chebyshev")
DERIVE_MODELS = ("kink-t", "bhaduri", "hermite")
STATES = ("psi0", "psi2", "chi0", "chi2")


class UsageError(Exception):
    pass


def rational(text: str) -> Fraction:
    try:
        return parse_rat(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational 'p/q': {text!r}")


def positive_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("expected a nonnegative integer")
    return v


# -- model resolution ---------------------------------------------------------------

def _bhaduri_bindings(args) -> dict:
    if args.l is not None or args.mq is not None:
        p = BhaduriParams(args.l or 0, args.mq or 0, args.g1 if args.g1 is not None else Fraction(0))
        return p.bindings()
    return {k: getattr(args, k) for k in ("a", "b", "c") if getattr(args, k) is not None}


def resolve_family(args, need_bound: bool):
    """(recurrence, bindings, seed, params) for a family model."""
    model = args.model
    if model.startswith("kink"):
        even, odd = kink_sectors()
        table = {"kink-even": even, "kink-odd": odd,
                 "kink-even-printed": PRINTED_KINK_EVEN, "kink-odd-printed": PRINTED_KINK_ODD}
        rec = table[model]
        b = {}
        if args.eps2 is not None:
            b["eps2"] = args.eps2
        elif need_bound:
            b["eps2"] = Fraction(1, 2)
        return rec, b, None, {"eps2": b.get("eps2")}
    if model in ("bhaduri", "bhaduri-printed"):
        b = _bhaduri_bindings(args)
        missing = [k for k in ("a", "b", "c") if k not in b]
        if need_bound and missing:
            raise UsageError(f"model {model} needs --{' --'.join(missing)} (or --l --mq --g1)")
        rec = bhaduri_recurrence() if model == "bhaduri" else PRINTED_BHADURI
        return rec, b, None, {k: b.get(k) for k in ("a", "b", "c")}
    if model == "hermite":
        return monic_hermite_recurrence(), {}, None, {}
    if model == "chebyshev":
        return chebyshev_like_recurrence(), {}, CHEBYSHEV_SEED, {"c": Fraction(1, 4), "seed": list(CHEBYSHEV_SEED)}
    raise UsageError(f"unknown model {model!r}")


# -- subcommands ------------------------------------------------------------------

def cmd_derive(args):
    scaling = args.scaling
    if args.model == "kink-t":
        ode = build_kink_t_ode()
        spectral = args.spectral or "s"
        rec = derive_recurrence(ode, SeriesAnsatz(scaling), spectral)
        if scaling == "factorial" and spectral == "s":
            rec = rec.with_lead_shift(2)
        params = {"model": "kink-t", "spectral": spectral, "scaling": scaling}
        extra = {}
        if scaling == "factorial" and spectral == "s":
            extra["printed_difference"] = [str(d) for d in recurrence_diff(rec, PRINTED_KINK)]
    elif args.model == "bhaduri":
        b = _bhaduri_bindings(args)
        spectral = args.spectral or "beta"
        ode = build_bhaduri_ode(None, spectral)
        if b:
            ode = ode.substitute(b)
        rec = derive_recurrence(ode, SeriesAnsatz(scaling), spectral, lead_shift=0)
        params = {"model": "bhaduri", "spectral": spectral, "scaling": scaling,
                  **{k: b.get(k) for k in ("a", "b", "c")}}
        extra = {}
        if scaling == "factorial" and spectral == "beta" and not b:
            extra["printed_difference"] = [str(d) for d in recurrence_diff(rec, PRINTED_BHADURI)]
    elif args.model == "hermite":
        spectral = args.spectral or "lam"
        rec = derive_recurrence(hermite_ode(spectral), SeriesAnsatz(scaling), spectral)
        params = {"model": "hermite", "spectral": spectral, "scaling": scaling}
        extra = {}
    else:
        raise UsageError(f"unknown model {args.model!r}")
    rec = rec.normalized()
    factored = rec.factored()
    if args.format == "csv":
        rows = [["j", "term", "coefficient", "factored"]]
        for j, (c, lab, f) in enumerate(zip(rec.coeffs, rec.labels(), factored)):
            rows.append([j, lab, str(c), f])
        return params, rows
    return params, {"recurrence": rec.to_json(), "factored": factored, **extra}


def cmd_favard(args):
    rec, b, seed, params = resolve_family(args, need_bound=False)
    rep = favard_check(rec, args.N, b or None, seed=seed)
    params.update(model=args.model, N=args.N)
    if args.format == "csv":
        return params, [["n", "code", "detail"]] + [[v.n, v.code, v.detail] for v in rep.violations]
    return params, {"report": rep.to_json()}


def cmd_sequence(args):
    rec, b, seed, params = resolve_family(args, need_bound=True)
    seq = generate_sequence(rec, b, args.N, seed=seed)
    params.update(model=args.model, N=args.N)
    if args.format == "csv":
        return params, seq.csv_rows()
    return params, {"sequence": seq.to_json()}


def cmd_gram(args):
    rec, b, seed, params = resolve_family(args, need_bound=True)
    seq = generate_sequence(rec, b, args.size - 1, seed=seed)
    params.update(model=args.model, size=args.size, moments=args.moments)
    if args.moments == "probe":
        probe = probe_orthogonality(seq, args.size)
        result = {"probe": {"size": probe.size, "tested": probe.tested, "diagonal_hits": probe.diagonal_hits,
                            "free_degrees": list(probe.free_degrees), "non_orthogonal": probe.non_orthogonal}}
        if args.format == "csv":
            return params, [["size", "tested", "diagonal_hits"], [probe.size, probe.tested, probe.diagonal_hits]]
        return params, result
    if args.moments == "sequence":
        L = moments_from_sequence(generate_sequence(rec, b, 2 * args.size, seed=seed))
    else:
        need = 2 * max(p.degree for p in seq.entries) + 1
        L = best_effort_moments(seq, need)
    G = gram_matrix(seq, L, args.size)
    if args.format == "csv":
        return params, [[f"G{j}" for j in range(G.size)]] + [[format_rat(x) for x in row] for row in G.entries]
    return params, {"moments": L.to_json(), "gram": G.to_json(), "diagonal": G.is_diagonal()}


def cmd_truncate(args):
    if args.model not in ("kink-even", "kink-odd", "kink-even-printed", "kink-odd-printed", "bhaduri"):
        raise UsageError(f"truncate does not support model {args.model!r}")
    rec, b, seed, params = resolve_family(args, need_bound=True)
    if rec.spectral in b:
        raise UsageError("the spectral variable must stay free")
    lo, hi = args.interval
    res = truncation_scan(rec, b, args.M_max, (lo, hi), seed=seed)
    params.update(model=args.model, M_max=args.M_max, interval=[lo, hi])
    out = res.to_json()
    if args.format == "csv":
        rows = [["M", "qes_point", "energy_over_mu2"]]
        for M, q in res.qes_points():
            rows.append([M, format_rat(q), format_rat(1 - q * q)])
        return params, rows
    if args.model.startswith("kink"):
        out["energies_over_mu2"] = [{"M": M, "s": format_rat(q), "E": format_rat(1 - q * q)}
                                   for M, q in res.qes_points()]
    return params, {"truncation": out}


def _potential(args):
    mu = args.mu
    if args.potential in ("kink", "periodic"):
        p = KinkParams(mu, args.eps2 if args.eps2 is not None else Fraction(1, 2))
        if args.potential == "kink":
            L = args.L / mu
            return (lambda x: kink_potential(x, p)), Grid(-L, L, args.N, "dirichlet"), {"eps2": p.eps2}
        span = 2 * (2 * np.pi / mu) if args.L is None else args.L
        return (lambda th: periodic_potential(th, p)), Grid(0.0, span, args.N, "periodic"), {"eps2": p.eps2}
    if args.potential == "radial":
        rp = bhaduri_radial_problem(args.beta)
        return rp.potential, Grid(0.0, args.L if args.L is not None else rp.R_max, args.N, "dirichlet"), {"beta": args.beta}
    if args.potential == "box":
        hi = args.L if args.L is not None else np.pi
        return (lambda x: np.zeros_like(x)), Grid(0.0, hi, args.N, args.bc or "dirichlet"), {}
    raise UsageError(f"unknown potential {args.potential!r}")


def cmd_spectrum(args):
    if args.L is None and args.potential == "kink":
        args.L = 25.0
    V, grid, extra = _potential(args)
    if args.bc and args.bc != grid.bc:
        grid = Grid(grid.lo, grid.hi, grid.N, args.bc)
    params = {"potential": args.potential, "mu": args.mu, "lo": grid.lo, "hi": grid.hi, "N": args.N,
              "bc": grid.bc, "k": args.k, "richardson": args.richardson, **extra}
    if args.L is not None:
        params["L"] = args.L
    if args.richardson:
        coarse, fine, sp = solve_richardson(V, grid, args.k, args.potential, vectors=args.vectors)
        vec_src = fine
    else:
        sp = solve(V, grid, args.k, args.potential, vectors=args.vectors)
        vec_src = sp
    if args.potential == "radial":
        params["energy"] = "eigenvalue/2"
    if args.format == "csv":
        if args.vectors:
            return params, vec_src.vectors_csv()
        rows = [["j", "eigenvalue"]] + [[j, repr(float(e))] for j, e in enumerate(sp.eigenvalues)]
        return params, rows
    out = {"spectrum": sp.to_json()}
    if args.richardson:
        out["coarse"] = coarse.to_json()
        out["fine"] = fine.to_json()
    if args.vectors:
        out["nodes"] = [vec_src.nodes(j) for j in range(len(sp))]
    if args.potential == "radial":
        out["energies"] = [float(e) / 2 for e in sp.eigenvalues]
    return params, out


def _state(name, eps2, mu):
    if name.startswith("psi"):
        states = kink_qes_states(eps2)
        V = lambda x, p=KinkParams(mu, eps2): kink_potential(x, p)  # noqa: E731
    else:
        states = periodic_qes_states(eps2)
        V = lambda th, p=KinkParams(mu, eps2): periodic_potential(th, p)  # noqa: E731
    want = {"psi0": Fraction(1), "psi2": Fraction(1, 2), "chi0": Fraction(1, 2), "chi2": Fraction(1)}[name]
    for st in states:
        if st.s == want:
            return st, V
    raise QesError(f"state {name} does not exist at eps2={format_rat(eps2)}", state=name)


def cmd_residual(args):
    eps2 = args.eps2 if args.eps2 is not None else Fraction(1, 2)
    st, V = _state(args.state, eps2, args.mu)
    psi = reconstruct_wavefunction(st, KinkParams(args.mu, eps2))
    if args.state.startswith("psi"):
        L = (args.L if args.L is not None else 10.0) / args.mu
        grid = Grid(-L, L, args.N, "dirichlet")
    else:
        grid = Grid(0.0, 4 * np.pi / args.mu, args.N, "periodic")
    E = float(st.energy(args.mu))
    rep = residual_report(psi, E, V, grid, args.state)
    params = {"state": args.state, "eps2": eps2, "mu": args.mu, "N": args.N, "s": st.s,
              "series": str(st.series)}
    if args.format == "csv":
        x = grid.points
        return params, table_csv(x, {"V": V(x), "psi": psi(x)})
    return params, {"residual": rep.to_json()}


def cmd_antiiso(args):
    theta = np.linspace(-2 * np.pi, 2 * np.pi, args.points)
    rows = []
    for e in args.eps2:
        p = KinkParams(args.mu, e)
        vk = kink_potential(1j * theta, p)
        vp = periodic_potential(theta, p)
        rows.append({"eps2": format_rat(e), "max_sum": float(np.max(np.abs(vp + np.real(vk)))),
                     "max_imag": float(np.max(np.abs(np.imag(vk))))})
    params = {"mu": args.mu, "points": args.points, "eps2": list(args.eps2)}
    if args.format == "csv":
        return params, [["eps2", "max_sum", "max_imag"]] + [[r["eps2"], repr(r["max_sum"]), repr(r["max_imag"])]
                                                            for r in rows]
    return params, {"checks": rows, "max": max(max(r["max_sum"], r["max_imag"]) for r in rows)}


def cmd_radial(args):
    rows = []
    for beta in args.beta:
        rp = bhaduri_radial_problem(beta)
        _, _, sp = solve_richardson(rp.potential, Grid(0.0, rp.R_max, args.N, "dirichlet"), args.levels, "radial")
        for n_r, lam in enumerate(sp.eigenvalues):
            E = float(rp.energy(lam))
            rows.append({"beta": beta, "n_r": n_r, "E": E, "expected": rp.expected(n_r),
                         "error": abs(E - rp.expected(n_r))})
    params = {"beta": list(args.beta), "N": args.N, "levels": args.levels}
    if args.format == "csv":
        return params, [["beta", "n_r", "E", "expected", "error"]] + [
            [r["beta"], r["n_r"], repr(r["E"]), r["expected"], repr(r["error"])] for r in rows]
    return params, {"levels": rows, "max_error": max(r["error"] for r in rows)}


# -- plumbing ---------------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, Fraction):
        return format_rat(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, np.generic):
        return v.item()
    return v


def render(command: str, params: dict, payload, fmt: str, stamp: bool) -> str:
    params = _jsonable(params)
    if fmt == "json":
        doc = {"schema": f"qeslab/cli/{command}/{SCHEMA_VERSION}", "command": command, "params": params}
        doc.update(_jsonable(payload))
        if stamp:
            doc["provenance"] = {"version": __version__, "created": datetime.now(timezone.utc).isoformat()}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    for k in sorted(params):
        buf.write(f"# {k}={json.dumps(params[k])}\n")
    if stamp:
        buf.write(f"# created={datetime.now(timezone.utc).isoformat()}\n")
    if isinstance(payload, str):
        buf.write(payload)
    else:
        csv.writer(buf, lineterminator="\n").writerows(payload)
    return buf.getvalue()


def write_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".qeslab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_schema(name: str) -> dict:
    """A JSON schema shipped under ``schemas/`` (``name`` without the suffix)."""
    return json.loads((resources.files("qeslab") / "schemas" / f"{name}.schema.json").read_text())


COMMANDS = {
    "derive": cmd_derive,
    "favard": cmd_favard,
    "sequence": cmd_sequence,
    "gram": cmd_gram,
    "truncate": cmd_truncate,
    "spectrum": cmd_spectrum,
    "residual": cmd_residual,
    "antiiso-check": cmd_antiiso,
    "radial-check": cmd_radial,
}


def _family_flags(p, models):
    p.add_argument("--model", required=True, choices=models)
    p.add_argument("--eps2", type=rational, help="eps^2 as p/q (kink models)")
    for k in ("a", "b", "c"):
        p.add_argument(f"--{k}", type=rational, help=f"Bhaduri {k} as p/q")
    p.add_argument("--l", type=int, help="Bhaduri l (with --mq, --g1 instead of --a --b --c)")
    p.add_argument("--mq", type=int)
    p.add_argument("--g1", type=rational)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="qeslab", description=__doc__.splitlines()[0])
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write here (atomically) instead of stdout")
        p.add_argument("--stamp", action="store_true", help="add a provenance timestamp")
        return p

    p = add("derive", "derive the series recurrence of a model ODE")
    p.add_argument("--model", required=True, choices=DERIVE_MODELS)
    p.add_argument("--spectral")
    p.add_argument("--scaling", choices=("factorial", "plain"), default="factorial")
    for k in ("a", "b", "c"):
        p.add_argument(f"--{k}", type=rational)
    p.add_argument("--l", type=int)
    p.add_argument("--mq", type=int)
    p.add_argument("--g1", type=rational)

    p = add("favard", "check the orthogonal three-term form")
    _family_flags(p, FAMILY_MODELS)
    p.add_argument("-N", type=positive_int, default=20)

    p = add("sequence", "generate the polynomial family")
    _family_flags(p, FAMILY_MODELS)
    p.add_argument("-N", type=positive_int, default=10)

    p = add("gram", "Gram matrix under a moment functional")
    _family_flags(p, FAMILY_MODELS)
    p.add_argument("--size", type=positive_int, default=6)
    p.add_argument("--moments", choices=("sequence", "best-effort", "probe"), default="sequence")

    p = add("truncate", "scan for truncation (QES) points")
    _family_flags(p, FAMILY_MODELS)
    p.add_argument("--M-max", dest="M_max", type=positive_int, default=10)
    p.add_argument("--interval", nargs=2, type=rational, default=[Fraction(0), Fraction(2)], metavar=("LO", "HI"))

    p = add("spectrum", "finite-difference spectrum")
    p.add_argument("--potential", required=True, choices=("kink", "periodic", "radial", "box"))
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--eps2", type=rational)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--L", type=float, help="half-width (kink, in units of 1/mu) or interval length")
    p.add_argument("-N", type=int, default=2000)
    p.add_argument("--bc", choices=("dirichlet", "periodic"))
    p.add_argument("-k", type=positive_int, default=5)
    p.add_argument("--richardson", action="store_true", help="also solve at half spacing and extrapolate")
    p.add_argument("--vectors", action="store_true", help="eigenvectors (node counts; CSV table)")

    p = add("residual", "pointwise residual of a closed-form QES state")
    p.add_argument("--state", required=True, choices=STATES)
    p.add_argument("--eps2", type=rational)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--L", type=float)
    p.add_argument("-N", type=int, default=2001)

    p = add("antiiso-check", "compare V_periodic(theta) with -V_kink(i theta)")
    p.add_argument("--eps2", type=rational, nargs="+", default=[Fraction(1, 3), Fraction(1, 2), Fraction(2)])
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--points", type=int, default=10_000)

    p = add("radial-check", "finite-difference check of the 4-d oscillator radial levels")
    p.add_argument("--beta", type=float, nargs="+", default=[1.0, 2.0])
    p.add_argument("-N", type=int, default=2001)
    p.add_argument("--levels", type=positive_int, default=2)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params, payload = COMMANDS[args.command](args)
        text = render(args.command, params, payload, args.format, args.stamp)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qeslab: error: {exc}", file=sys.stderr)
        return 2
    except QesError as exc:
        print(json.dumps(exc.to_dict(), sort_keys=True), file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError) as exc:
        print(json.dumps({"code": "INVALID_VALUE", "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return 1
    if args.out:
        write_atomic(args.out, text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
