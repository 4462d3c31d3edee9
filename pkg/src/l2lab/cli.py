"""Command-line front end: ``l2lab <subcommand> [options]``.

Every number is printed as an exact string (``num/den`` or a binary
expansion); the only decimals are fields named ``approx_*``.  Exit codes:
0 success, 1 validation error, 2 verification failure, 3 resource cap.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__
from .closure_calculus import realize_target
from .dimension_engine import (
    beta_constants,
    dimension_closed_form,
    dimension_direct_sum,
    routes_agree,
)
from .errors import L2LabError, ResourceError, ValidationError, VerificationError
from .exact import DimensionEnclosure, parse_binary, rational_str
from .finite_models import parity_table
from .gf2_measure import (
    CylinderEvent,
    brute_count_extendable,
    count_extendable,
    cylinder_measure,
    estimate_event,
    hook_measure,
    hook_system,
    omega_classes,
)
from .group_core import (
    GroupId,
    IndexSetSpec,
    ExplicitIndexSet,
    index_set_from_json,
    t_generator,
)
from .word_problem import (
    GF2Vector,
    decide_membership,
    enumerate_relations,
    generator_w,
    is_in_V,
    random_member,
    relation_is_sound,
)

MAX_TERMS = 64
MAX_L = 400
MAX_SAMPLES = 10**7
MAX_LMAX = 5000
MAX_RELATIONS = 100_000
MAX_BITS = 4096


@dataclass
class RunConfig:
    group: GroupId
    index_set: IndexSetSpec
    seed: int
    fmt: str

    def check(self, **bounds) -> None:
        caps = {"terms": MAX_TERMS, "L": MAX_L, "samples": MAX_SAMPLES,
                "l_max": MAX_LMAX, "count": MAX_RELATIONS, "bits": MAX_BITS}
        for name, value in bounds.items():
            if value is None:
                continue
            if value < 0:
                raise ValidationError(f"--{name} must be non-negative")
            if value > caps[name]:
                raise ResourceError(f"--{name}={value} exceeds the cap {caps[name]}")


def load_json_arg(text: str):
    """A JSON literal, or the path of a file holding one."""
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {exc}") from None


def make_config(args) -> RunConfig:
    I = index_set_from_json(load_json_arg(args.index_set))
    return RunConfig(GroupId.parse(args.group), I, args.seed, args.format)


# ---------------------------------------------------------------------------
# output


def emit(report: dict, rows: list[dict] | None, fmt: str, out) -> None:
    if fmt == "csv":
        rows = rows if rows is not None else [_flat(report)]
        fields: list[str] = []
        for r in rows:
            fields += [k for k in r if k not in fields]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        out.write(buf.getvalue())
    else:
        out.write(json.dumps(report, indent=2) + "\n")


def _flat(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flat(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v)
        else:
            out[key] = v
    return out


def _fr(x: Fraction) -> str:
    return rational_str(x)


# ---------------------------------------------------------------------------
# subcommands


def cmd_dim(cfg: RunConfig, args) -> tuple[dict, list | None, int]:
    cfg.check(terms=args.terms, L=args.L, bits=args.bits)
    b1, b2 = beta_constants(args.constants)
    report: dict = {
        "index_set": cfg.index_set.to_json(),
        "constants": args.constants,
        "beta1": _fr(b1),
        "beta2": _fr(b2),
    }
    encl: dict[str, DimensionEnclosure] = {}
    if args.route in ("closed", "both"):
        encl["closed"] = dimension_closed_form(cfg.index_set, args.terms, args.constants)
    if args.route in ("direct", "both"):
        encl["direct"] = dimension_direct_sum(cfg.index_set, args.L)
    for name, e in encl.items():
        report[name] = e.to_json(args.bits)
    if len(encl) == 2:
        report["routes_agree"] = routes_agree(encl["closed"], encl["direct"])
    rows = [{"route": k, "lower": _fr(e.lower), "upper": _fr(e.upper), "width": _fr(e.width)}
            for k, e in encl.items()]
    return report, rows, 0


def cmd_models(cfg: RunConfig, args) -> tuple[dict, list | None, int]:
    cfg.check(l_max=args.l_max)
    if args.l_max < 2:
        raise ValidationError("--l-max must be >= 2")
    rows = [{"l": l, "i": i, "j": j, "dim": d} for l, i, j, d in parity_table(args.l_max)]
    return {"rows": rows}, rows, 0


def cmd_measure(cfg: RunConfig, args) -> tuple[dict, list | None, int]:
    sys_, psi = hook_system(args.n, args.m, cfg.index_set, cfg.group)
    exact = cylinder_measure(psi, sys_)
    formula = hook_measure(args.n, args.m, cfg.index_set)
    report = {
        "n": args.n, "m": args.m, "group": cfg.group.value,
        "window_size": len(sys_.window),
        "K": omega_classes(sys_).K,
        "extendable_count": str(count_extendable(sys_)),
        "measure": _fr(exact),
        "hook_formula": _fr(formula),
    }
    if args.brute:
        brute = brute_count_extendable(sys_)
        report["brute_count"] = str(brute)
        if brute != count_extendable(sys_):
            raise VerificationError("brute-force count disagrees with the formula")
    return report, None, 0


def cmd_sample(cfg: RunConfig, args) -> tuple[dict, list | None, int]:
    cfg.check(samples=args.samples)
    sys_, psi = hook_system(args.n, args.m, cfg.index_set, cfg.group)
    freq, sigma = estimate_event(sys_, CylinderEvent(psi), args.samples, cfg.seed)
    exact = cylinder_measure(psi, sys_)
    within = abs(freq - exact) <= 4 * sigma
    report = {
        "n": args.n, "m": args.m, "group": cfg.group.value, "seed": cfg.seed,
        "samples": args.samples,
        "frequency": _fr(freq), "sigma_upper": _fr(sigma), "exact": _fr(exact),
        "within_4_sigma": within,
        "approx_frequency": float(freq), "approx_exact": float(exact),
    }
    return report, None, 0


def cmd_target(cfg: RunConfig, args) -> tuple[dict, list | None, int]:
    r = parse_binary(args.r)
    value = realize_target(r, args.precision, args.D, args.constants)
    report = {
        "r": args.r, "precision": args.precision,
        "value": _fr(value.value.value),
        "recipe": value.recipe.to_json(),
    }
    return report, None, 0


def cmd_member(cfg: RunConfig, args) -> tuple[dict, list | None, int]:
    items = load_json_arg(args.vector)
    if not isinstance(items, list):
        raise ValidationError("vector must be a JSON list of group elements")
    x = GF2Vector.from_json(items, cfg.group)
    res = decide_membership(x, cfg.index_set)
    report = {"group": cfg.group.value, "vector": x.to_json()} | res.to_json()
    rows = [{"member": res.member, "g": str(g), "t": str(t)} for g, t in res.certificate]
    return report, rows or [{"member": res.member, "reason": res.reason}], 0


def cmd_relations(cfg: RunConfig, args) -> tuple[dict, list | None, int]:
    cfg.check(count=args.count)
    rels = enumerate_relations(cfg.index_set, args.count, cfg.group)
    rows = [{"index": i, "kind": r.kind, "relation": r.text} for i, r in enumerate(rels)]
    return {"group": cfg.group.value, "relations": rows}, rows, 0


# ---------------------------------------------------------------------------
# verify suites


def _suite_models(cfg, args) -> list[dict]:
    bad = [(l, i, j, d) for l, i, j, d in parity_table(args.l_max)
           if d != (1 if (i, j) == (1, 1) and l % 3 == 1 else 0)]
    return [{"check": f"parity law up to l={args.l_max}", "passed": not bad,
             "detail": f"{len(bad)} mismatches"}]


def _suite_measures(cfg, args) -> list[dict]:
    out = []
    for k, (n, m) in enumerate(((1, 1), (2, 2))):
        sys_, psi = hook_system(n, m, ExplicitIndexSet([2]), cfg.group)
        freq, sigma = estimate_event(sys_, CylinderEvent(psi), args.samples, cfg.seed + k)
        exact = hook_measure(n, m, [2])
        out.append({"check": f"hook ({n},{m}) frequency vs {_fr(exact)}",
                    "passed": abs(freq - exact) <= 4 * sigma,
                    "detail": f"frequency {_fr(freq)}, sigma {_fr(sigma)}"})
    return out


def _suite_member(cfg, args) -> list[dict]:
    rng = np.random.default_rng(cfg.seed)
    I = cfg.index_set
    errors = 0
    for _ in range(args.rounds):
        x, _ = random_member(I, cfg.group, int(rng.integers(1, 6)), rng)
        res = decide_membership(x, I)
        if not res.member or res.replay() != x:
            errors += 1
    out = [{"check": f"{args.rounds} random members accepted and replayed",
            "passed": errors == 0, "detail": f"{errors} errors"}]
    wrong = [b for b in range(1, 31)
             if b not in I and is_in_V(generator_w(t_generator(b, cfg.group)), I)]
    out.append({"check": "w_t rejected for indices outside I up to 30",
                "passed": not wrong, "detail": f"wrongly accepted: {wrong}"})
    rels = enumerate_relations(I, 200, cfg.group)
    unsound = sum(not relation_is_sound(r, I, cfg.group) for r in rels)
    out.append({"check": "first 200 relations hold in the semidirect model",
                "passed": unsound == 0, "detail": f"{unsound} unsound"})
    return out


def _suite_routes(cfg, args) -> list[dict]:
    out = []
    for I in ([2], [2, 5]):
        direct = dimension_direct_sum(I, 80)
        for constants in ("stated", "derived"):
            closed = dimension_closed_form(I, 8, constants)
            ok = routes_agree(closed, direct)
            out.append({"check": f"closed ({constants}) vs direct for I={I}", "passed": ok,
                        "detail": f"closed {_fr(closed.lower)}, direct {_fr(direct.lower)}"})
    return out


def _suite_table(cfg, args) -> list[dict]:
    from .local_rules import LocalClass, table_entry
    bad = 0
    for a in LocalClass:
        for b in LocalClass:
            f1, f2 = table_entry(a, b)
            g1, g2 = table_entry(b, a)
            bad += (f1, f2) != (g2, g1)
    return [{"check": "second table is the transpose of the first", "passed": bad == 0,
             "detail": f"{bad} mismatches"}]


def _suite_partition(cfg, args) -> list[dict]:
    from .group_core import ball
    from .local_rules import Pattern, classify_configuration
    rng = np.random.default_rng(cfg.seed)
    window = ball(6, cfg.group)
    core = ball(2, cfg.group)
    failures = 0
    labels: dict[str, int] = {}
    for _ in range(args.rounds):
        bits = (rng.random(len(window)) < 0.3).astype(int)
        chi = Pattern.from_bits(window, bits)
        for c in core[:5]:
            try:
                lab = classify_configuration(chi, c).label
                labels[lab] = labels.get(lab, 0) + 1
            except L2LabError:
                failures += 1
    return [{"check": "every random configuration lands in exactly one class",
             "passed": failures == 0, "detail": json.dumps(labels, sort_keys=True)}]


SUITES: dict[str, Callable] = {
    "models": _suite_models,
    "measures": _suite_measures,
    "member": _suite_member,
    "routes": _suite_routes,
    "table": _suite_table,
    "partition": _suite_partition,
}


def cmd_verify(cfg: RunConfig, args) -> tuple[dict, list | None, int]:
    cfg.check(samples=args.samples, l_max=args.l_max)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    rows = []
    for name in names:
        for r in SUITES[name](cfg, args):
            rows.append({"suite": name} | r)
    passed = all(r["passed"] for r in rows)
    return {"seed": cfg.seed, "passed": passed, "checks": rows}, rows, 0 if passed else 2


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1 like every other validation problem."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--group", choices=["free2", "wreath"], default="free2")
    common.add_argument("--index-set", default="[2]",
                        help="JSON list/object or path to a JSON file")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["json", "csv"], default="json")

    p = _Parser(prog="l2lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"l2lab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("dim", parents=[common], help="dimension enclosures")
    d.add_argument("--route", choices=["closed", "direct", "both"], default="both")
    d.add_argument("--terms", type=int, default=8)
    d.add_argument("--L", type=int, default=80)
    d.add_argument("--bits", type=int, default=0, help="binary digits to print")
    d.add_argument("--constants", choices=["stated", "derived"], default="stated")
    d.set_defaults(func=cmd_dim)

    m = sub.add_parser("models", parents=[common], help="path-model kernel table")
    m.add_argument("--l-max", type=int, default=30)
    m.set_defaults(func=cmd_models, format_default="csv")

    me = sub.add_parser("measure", parents=[common], help="exact hook cylinder measure")
    me.add_argument("--n", type=int, default=1)
    me.add_argument("--m", type=int, default=1)
    me.add_argument("--brute", action="store_true", help="cross-check by elimination")
    me.set_defaults(func=cmd_measure)

    s = sub.add_parser("sample", parents=[common], help="Monte-Carlo hook frequency")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--samples", type=int, default=100_000)
    s.set_defaults(func=cmd_sample)

    t = sub.add_parser("target", parents=[common], help="realize a binary target")
    t.add_argument("--r", required=True, help="binary string such as 0.1011")
    t.add_argument("--precision", type=int, default=8)
    t.add_argument("--D", type=int, default=None)
    t.add_argument("--constants", choices=["stated", "derived"], default="stated")
    t.set_defaults(func=cmd_target)

    mb = sub.add_parser("member", parents=[common], help="decide membership in V")
    mb.add_argument("--vector", required=True, help="JSON list of elements or a file")
    mb.set_defaults(func=cmd_member)

    r = sub.add_parser("relations", parents=[common], help="first relations of the presentation")
    r.add_argument("--count", type=int, default=20)
    r.set_defaults(func=cmd_relations)

    v = sub.add_parser("verify", parents=[common], help="run oracle suites")
    v.add_argument("suite", choices=["all", *SUITES])
    v.add_argument("--samples", type=int, default=10**6)
    v.add_argument("--l-max", type=int, default=500)
    v.add_argument("--rounds", type=int, default=1000)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if getattr(args, "format_default", None) and "--format" not in argv:
        args.format = args.format_default
    try:
        cfg = make_config(args)
        report, rows, code = args.func(cfg, args)
    except L2LabError as exc:
        print(f"l2lab: error: {exc}", file=sys.stderr)
        return exc.exit_code
    emit(report, rows, cfg.fmt, out)
    return code
