"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 1 internal invariant violated.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction

from . import __version__
from ._accel import set_threads
from .errors import InvariantError, ValidationError

SCHEMA_VERSION = 1

DESCRIPTION = """\
Towers of finite covers of punctured hyperbolic surfaces and the horocycle
flow on their inverse limits.

subcommands and what they exercise:
  tower build        example towers: cusp-preserving, cusp-splitting, cusp-doubling,
                     non-regular one-cusp, congruence, affine suspension
  tower classify     trichotomy of minimal sets over a closed horocycle from c_n:
                     one minimal set / m solenoids / infinitely many
  tower ends         the forest of cuspidal ends; finite or Cantor end space
  odometer orbit     the odometer (F_n, T_n, q_n) over a cusp acting on an address
  odometer decompose minimal components of the odometer (count equals c_L)
  congruence verify  index, cusp and genus formulas for Gamma(n) by brute force
  flow push          pushed closed horocycles become epsilon-dense as t -> -infinity
  flow escape        pushed closed horocycles converge to a cuspidal end as t -> +infinity
  haar test          random words equidistribute on the finite quotients
"""


def parse_list(text: str, cast=float) -> list:
    """Comma list with optional arithmetic continuation: ``-2,-4,...,-12``."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if "..." not in parts:
        try:
            return [cast(p) for p in parts]
        except ValueError:
            raise ValidationError(f"cannot parse list {text!r}") from None
    k = parts.index("...")
    if k < 2 or k != len(parts) - 2:
        raise ValidationError(f"'...' needs two leading values and one final value: {text!r}")
    try:
        head = [Fraction(p) for p in parts[:k]]
        last = Fraction(parts[-1])
    except ValueError:
        raise ValidationError(f"cannot parse list {text!r}") from None
    step = head[-1] - head[-2]
    if step == 0 or (last - head[-1]) * step < 0 or (last - head[-1]) % step:
        raise ValidationError(f"{text!r} is not an arithmetic progression")
    vals = list(head)
    while vals[-1] != last:
        vals.append(vals[-1] + step)
    return [cast(v) for v in vals]


def parse_range(text: str) -> list[int]:
    if ".." in text and "," not in text:
        a, b = text.split("..")
        try:
            return list(range(int(a), int(b) + 1))
        except ValueError:
            raise ValidationError(f"cannot parse range {text!r}") from None
    return parse_list(text, int)


def parse_grid(text: str) -> tuple[int, int, int]:
    try:
        dims = tuple(int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ValidationError(f"grid must look like 24x24x12, got {text!r}") from None
    if len(dims) != 3:
        raise ValidationError(f"grid must have three dimensions, got {text!r}")
    return dims


def _write(text: str, out: str | None) -> None:
    if out:
        try:
            with open(out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ValidationError(f"cannot write {out}: {exc}") from None
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _load(path):
    from .covering import load_tower

    return load_tower(path)


# --- handlers -------------------------------------------------------------------

def cmd_tower_build(a):
    from .covering import build_example, build_padic_suspension, save_tower

    if a.depth < 0:
        raise ValidationError("depth must be >= 0")
    if a.example == "padic":
        t = build_padic_suspension(a.p, a.cusps, a.depth)
    else:
        t = build_example(a.example, a.depth)
    if a.out:
        save_tower(t, a.out)
    else:
        from .covering import tower_to_json

        _write(json.dumps(tower_to_json(t), separators=(",", ":"), sort_keys=True) + "\n", None)


def cmd_tower_classify(a):
    from .covering import classify_trichotomy, genus_of_cover, is_mccord

    t = _load(a.input)
    rep = classify_trichotomy(t, a.cusp, a.depth, a.window)
    if a.format == "json":
        data = rep.to_json()
        data.update(schema_version=SCHEMA_VERSION, mccord=is_mccord(t, a.depth),
                    genus=[genus_of_cover(t.levels[n]) for n in range(len(rep.counts))])
        _write(_json(data), a.out)
    else:
        _write(f"{rep}\n({rep.note})\n", a.out)


def cmd_tower_ends(a):
    from .profinite import classify_end_space, dumps_forest, end_forest

    t = _load(a.input)
    f = end_forest(t, a.depth)
    if a.format == "dot":
        _write(f.to_dot(), a.out)
    else:
        data = f.to_json()
        data["classification"] = [str(classify_end_space(f, min(a.window, f.depth), j)) if f.depth else "finite(1)"
                                  for j in range(t.base.cusps)]
        _write(_json(data), a.out)


def cmd_odometer_orbit(a):
    from .profinite import address_of, containing_cycle_lcm, odometer_from_cusp, orbit_length, step

    t = _load(a.input)
    o = odometer_from_cusp(t, a.cusp, a.depth)
    L = o.depth
    if not 0 <= a.point < len(o.T[L]):
        raise ValidationError(f"point {a.point} outside F_{L}")
    addr = address_of(o, a.point, L)
    orbit = [list(addr)]
    cur = addr
    for _ in range(a.steps):
        cur = step(o, cur)
        orbit.append(list(cur))
    data = {"schema_version": SCHEMA_VERSION, "cusp": a.cusp, "depth": L, "address": list(addr),
            "orbit_length": orbit_length(o, addr), "cycle_lcm": containing_cycle_lcm(o, addr),
            "orbit": orbit, "cycle_types": o.cycle_types()}
    _write(_json(data), a.out)


def cmd_odometer_decompose(a):
    from .covering import cusp_counts
    from .profinite import is_minimal, minimal_decomposition, odometer_from_cusp

    t = _load(a.input)
    o = odometer_from_cusp(t, a.cusp, a.depth)
    comps = minimal_decomposition(o)
    data = {"schema_version": SCHEMA_VERSION, "cusp": a.cusp, "depth": o.depth,
            "components": len(comps), "c": list(cusp_counts(t, a.cusp, o.depth)), "minimal": is_minimal(o),
            "cycle_lengths": [list(c.cycle_lengths) for c in comps], "cycle_types": o.cycle_types()}
    _write(_json(data), a.out)


def cmd_congruence_verify(a):
    from .congruence import verify_formulas

    rows = verify_formulas(parse_range(a.n))
    cols = ["n", "index_formula", "index_bruteforce", "cusps_formula", "cusps_bruteforce", "genus"]
    if a.format == "json":
        _write(_json({"schema_version": SCHEMA_VERSION, "columns": cols, "rows": rows}), a.out)
    else:
        _write(_csv(cols, [[r[c] for c in cols] for r in rows]), a.out)


def cmd_flow_push(a):
    from .density import grid_for, pushforward_experiment
    from .hyperbolic import flow_context

    t = _load(a.tower) if a.tower else None
    n_re, n_im, n_theta = parse_grid(a.grid)
    level = a.level if t is not None else 0
    ctx = flow_context(t, level)
    grid = grid_for(ctx, a.ymax, n_re, n_im, n_theta, level)
    series = pushforward_experiment(ctx, a.y0, parse_list(a.t), a.samples, grid, seed=a.seed,
                                    mass_floor=a.mass_floor)
    cols = ["t", "coverage", "max_missed_mass", "discrepancy", "min_height"]
    rows = [[t_, r.coverage, r.max_missed_mass, r.discrepancy, r.min_height] for t_, r in series]
    _write(_csv(cols, rows), a.out)
    if a.out:
        side = {"schema_version": SCHEMA_VERSION, "tower": a.tower, "y0": a.y0, "samples": a.samples,
                "seed": a.seed, "level": level, "mass_floor": a.mass_floor, "grid": grid.as_dict(),
                "reports": [{"t": t_, **r.to_json()} for t_, r in series]}
        _write(_json(side), a.out + ".json")


def cmd_flow_escape(a):
    from .density import escape_experiment

    t = _load(a.tower) if a.tower else None
    res = escape_experiment(a.y0, parse_list(a.t), a.samples, t, seed=a.seed)
    _write(_csv(["t", "min_height", "end_distance"], [[r["t"], r["min_height"], r["end_distance"]] for r in res]), a.out)


def cmd_haar_test(a):
    from .density import haar_equidistribution_test, psl2_walk_generators

    lengths = parse_list(a.length, int)
    if a.psl2:
        perms = psl2_walk_generators(a.psl2)
        source = {"psl2": a.psl2}
    elif a.tower:
        t = _load(a.tower)
        if not 0 <= a.level <= t.depth:
            raise ValidationError(f"level {a.level} outside 0..{t.depth}")
        perms = t.levels[a.level].perms
        source = {"tower": a.tower, "level": a.level}
    else:
        raise ValidationError("give --tower FILE --level L or --psl2 N")
    tv = haar_equidistribution_test(perms, lengths, a.samples, a.seed)
    _write(_json({"schema_version": SCHEMA_VERSION, **source, "samples": a.samples, "seed": a.seed,
                  "tv": {str(k): v for k, v in tv.items()}}), a.out)


# --- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="horosol", description=DESCRIPTION,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--threads", type=int, default=None, help="cap worker threads (results do not change)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="group", required=True)

    tower = sub.add_parser("tower", help="build and classify towers of covers").add_subparsers(dest="cmd", required=True)
    b = tower.add_parser("build", help="build an example tower and write a .tower.json file")
    b.add_argument("--example", required=True,
                   help="class1, class1m<m>, class2, class3, nonregular, congruence, triadic or padic")
    b.add_argument("--depth", type=int, required=True)
    b.add_argument("--p", type=int, default=3, help="prime for --example padic")
    b.add_argument("--cusps", type=int, default=1, help="number of cusps for --example padic")
    b.add_argument("--out")
    b.set_defaults(func=cmd_tower_build)

    c = tower.add_parser("classify", help="trichotomy from the cusp counts c_0..c_L")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--cusp", type=int, default=0)
    c.add_argument("--depth", type=int, default=None)
    c.add_argument("--window", type=int, default=1)
    c.add_argument("--format", choices=["text", "json"], default="text")
    c.add_argument("--out")
    c.set_defaults(func=cmd_tower_classify)

    e = tower.add_parser("ends", help="forest of cuspidal ends (DOT or JSON)")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--depth", type=int, default=None)
    e.add_argument("--window", type=int, default=1)
    e.add_argument("--format", choices=["json", "dot"], default="json")
    e.add_argument("--out")
    e.set_defaults(func=cmd_tower_ends)

    odo = sub.add_parser("odometer", help="odometers over a cusp").add_subparsers(dest="cmd", required=True)
    o = odo.add_parser("orbit", help="orbit of an address under the odometer")
    o.add_argument("--in", dest="input", required=True)
    o.add_argument("--cusp", type=int, default=0)
    o.add_argument("--depth", type=int, default=None)
    o.add_argument("--point", type=int, default=0, help="point of F_L determining the address")
    o.add_argument("--steps", type=int, default=8)
    o.add_argument("--out")
    o.set_defaults(func=cmd_odometer_orbit)
    d = odo.add_parser("decompose", help="minimal components")
    d.add_argument("--in", dest="input", required=True)
    d.add_argument("--cusp", type=int, default=0)
    d.add_argument("--depth", type=int, default=None)
    d.add_argument("--out")
    d.set_defaults(func=cmd_odometer_decompose)

    cong = sub.add_parser("congruence", help="principal congruence subgroups").add_subparsers(dest="cmd", required=True)
    v = cong.add_parser("verify", help="index/cusp/genus formulas vs brute force")
    v.add_argument("--n", default="3..12", help="range like 3..12 or list like 3,5,7")
    v.add_argument("--format", choices=["csv", "json"], default="csv")
    v.add_argument("--out")
    v.set_defaults(func=cmd_congruence_verify)

    flow = sub.add_parser("flow", help="horocycle flow experiments").add_subparsers(dest="cmd", required=True)
    fp = flow.add_parser("push", help="epsilon-density of pushed closed horocycles")
    fp.add_argument("--tower")
    fp.add_argument("--y0", type=float, default=1.0)
    fp.add_argument("--t", default="-2,-4,...,-12", help="decreasing times, e.g. -2,-4,...,-12")
    fp.add_argument("--samples", type=int, default=2_000_000)
    fp.add_argument("--grid", default="24x24x12")
    fp.add_argument("--ymax", type=float, default=3.0)
    fp.add_argument("--level", type=int, default=1)
    fp.add_argument("--mass-floor", type=float, default=1e-3)
    fp.add_argument("--seed", type=int, default=0)
    fp.add_argument("--out")
    fp.set_defaults(func=cmd_flow_push)
    fe = flow.add_parser("escape", help="escape of pushed closed horocycles to the cusp")
    fe.add_argument("--tower")
    fe.add_argument("--y0", type=float, default=1.0)
    fe.add_argument("--t", default="1,2,...,8")
    fe.add_argument("--samples", type=int, default=1000)
    fe.add_argument("--seed", type=int, default=0)
    fe.add_argument("--out")
    fe.set_defaults(func=cmd_flow_escape)

    haar = sub.add_parser("haar", help="random-walk equidistribution").add_subparsers(dest="cmd", required=True)
    h = haar.add_parser("test", help="total variation to uniform of random-word endpoints")
    h.add_argument("--tower")
    h.add_argument("--level", type=int, default=1)
    h.add_argument("--psl2", type=int, default=None, help="use PSL(2,Z/N) with letters S, ST")
    h.add_argument("--length", default="50")
    h.add_argument("--samples", type=int, default=100_000)
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--out")
    h.set_defaults(func=cmd_haar_test)
    return p


def _join_negative_values(argv):
    """Let ``--t -2,-4`` through argparse by rewriting it as ``--t=-2,-4``."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--t":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--t={nxt}")
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    set_threads(args.threads)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
