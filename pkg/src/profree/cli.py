"""Command-line front end.

Every command builds a normalized ``input`` record first (files are read
and embedded), computes a ``result`` from that record alone, and prints the
report ``{"schema": 1, "command", "input", "result"}``. ``--verify FILE``
replays a saved JSON report from its embedded input and compares bytes.

Exit codes: 0 success (including negative mathematical verdicts),
1 verification mismatch, 2 input error, 3 budget exhausted.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

from . import finquot, foxcalc, smallcancel, tubular, wordcore
from .errors import BudgetExceeded, InputError, MalnormalityError
from .wordcore import Word

SCHEMA = 1
EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


# ---------------------------------------------------------------- input helpers


def _word(text: str, rank: Optional[int]) -> Word:
    return Word.parse(text, rank)


def _rank_for(texts: list[str], rank: Optional[int]) -> int:
    if rank is not None:
        return rank
    return max((Word.parse(t).rank for t in texts), default=1)


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _group_spec(spec: str):
    """Group specs stay strings, except table files, which are embedded."""
    spec = spec.strip()
    if spec.startswith("@"):
        data = _read_json(spec[1:])
        if not isinstance(data, dict):
            raise InputError(f"{spec[1:]}: Cayley table must be a JSON object")
        return {"name": data.get("name", Path(spec[1:]).stem), "order": data.get("order"), "table": data.get("table")}
    return spec


def _family_spec(spec: str) -> list:
    return [_group_spec(s) for s in spec.split(",") if s.strip()]


def _group(spec) -> finquot.FiniteGroup:
    if isinstance(spec, dict):
        return finquot.group_from_json(spec, spec.get("name", "table"))
    return finquot.make_group(spec)


def _primes(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise InputError(f"bad prime list {text!r}") from None


def _fraction(text: str) -> str:
    try:
        f = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad rational {text!r}") from None
    return f"{f.numerator}/{f.denominator}"


def _big(n: int) -> str:
    return str(n)


# ---------------------------------------------------------------- commands
# each command is (build_input(args) -> dict, run(input) -> dict)


def _in_word(a):
    rank = _rank_for([a.word], a.rank)
    return {"word": _word(a.word, rank).text, "rank": rank}


def run_reduce(p):
    w = _word(p["word"], p["rank"])
    return {"word": w.text or "1", "letters": list(w.letters), "length": len(w)}


def _in_orbit(a):
    rank = _rank_for([a.word1, a.word2], a.rank)
    return {"word1": _word(a.word1, rank).text, "word2": _word(a.word2, rank).text, "rank": rank, "budget": a.budget}


def run_orbit(p):
    w1, w2 = _word(p["word1"], p["rank"]), _word(p["word2"], p["rank"])
    phi = wordcore.aut_orbit_equal(w1, w2, budget=p["budget"])
    return {"same_orbit": phi is not None, "witness": None if phi is None else phi.to_json()}


def run_primitive(p):
    w = _word(p["word"], p["rank"])
    w_min, phi = wordcore.whitehead_minimize(w)
    return {"primitive": wordcore.is_primitive(w), "minimal_form": w_min.text, "minimal_length": len(w_min), "witness": phi.to_json()}


def run_closure(p):
    w = _word(p["word"], p["rank"])
    basis, phi = wordcore.algebraic_closure(w)
    return {"basis": [b.text for b in basis], "closure_rank": len(basis), "witness": phi.to_json()}


def _in_malnormal(a):
    rank = _rank_for(a.words, a.rank)
    return {"words": [_word(t, rank).text for t in a.words], "rank": rank}


def run_malnormal(p):
    return wordcore.is_malnormal_family([_word(t, p["rank"]) for t in p["words"]]).to_json()


def _in_file(a):
    data = _read_json(a.file)
    return {"presentation": data}


def _hnn(p) -> tubular.HnnPresentation:
    try:
        return tubular.presentation_from_json(p["presentation"])
    except MalnormalityError as exc:
        raise InputError(f"{exc}: {exc.report.to_json()['violations']}") from None


def run_collapse(p):
    return _hnn(p).to_json()


def run_gamma(p):
    g = tubular.build_gamma(_hnn(p))
    return {"gamma": g.to_json(), "components": [c.to_json() for c in tubular.analyze_components(g)]}


def run_decide(p):
    h = _hnn(p)
    return tubular.decide(h).to_json(h)


def _in_britton(a):
    return {"presentation": _read_json(a.file), "word": a.word}


def run_britton(p):
    h = _hnn(p)
    w = tubular.parse_mixed(h, p["word"])
    r = tubular.britton_reduce(h, w)
    return {"reduced": tubular.format_mixed(h, r), "trivial": not r}


def run_edges(p):
    return {"edges": tubular.edge_closure_descriptor(_hnn(p))}


def _in_cohom(a):
    return {"presentation": _read_json(a.file), "prime": a.prime}


def run_cohom(p):
    return tubular.cohomology_report(_hnn(p), p["prime"]).to_json()


def _in_sc(a):
    rank = _rank_for(a.words, a.rank)
    return {"words": [_word(t, rank).text for t in a.words], "rank": rank, "lambda": _fraction(a.lam)}


def run_sc_check(p):
    R = smallcancel.symmetrize([_word(t, p["rank"]) for t in p["words"]])
    report = smallcancel.check_metric(R, Fraction(p["lambda"]))
    pieces = smallcancel.enumerate_pieces(R)
    return {
        "relator_count": len(R.relators),
        "piece_lengths": sorted({len(x.word) for x in pieces}),
        **report.to_json(),
    }


def _in_sc_exp(a):
    d = _in_sc(a)
    d["budget"] = a.exp_budget
    d["family"] = _family_spec(a.family) if a.family else []
    d["tuple_budget"] = a.budget
    return d


def run_sc_exponents(p):
    A = [_word(t, p["rank"]) for t in p["words"]]
    n = smallcancel.find_exponents(A, Fraction(p["lambda"]), p["budget"])
    out = {"exponent": n, "budget_exhausted": n is None}
    if n is not None:
        lam = Fraction(p["lambda"])
        out["passes_at_n"] = smallcancel.check_metric(smallcancel.power_presentation(A, n), lam).passes
        out["fails_below_n"] = n == 1 or not smallcancel.check_metric(smallcancel.power_presentation(A, n - 1), lam).passes
        # each a has order exactly n in <X | a^n>; finite quotients give evidence
        out["order_in_quotient"] = {a.text: n for a in A}
        family = [_group(s) for s in p["family"]]
        out["finite_checks"] = [c.to_json() for c in smallcancel.order_certificates(A, n, family, p["tuple_budget"])]
    return out


def run_fox(p):
    w = _word(p["word"], p["rank"])
    return {
        "derivatives": [foxcalc.fox_derivative(w, i).to_json() for i in range(1, w.rank + 1)],
        "fundamental_identity": foxcalc.verify_fundamental_identity(w),
    }


def _in_tau(a):
    d = _in_word(a)
    d["n"] = a.n
    return d


def run_tau(p):
    return {"row": [e.to_json() for e in foxcalc.tau_row(_word(p["word"], p["rank"]), p["n"])]}


def _in_trace(a):
    return {"n": a.n, "prime": a.prime}


def run_trace(p):
    tr = foxcalc.trace_element(p["n"], p["prime"])
    a = foxcalc.FiniteAlgebraElement.basis(tr.group, tr.p, 1 % p["n"])
    return {"coefficients": tr.to_json(), "fixed_by_generator": a * tr == tr, "augmentation": tr.augmentation()}


def _in_resolution(a):
    d = _in_tau(a)
    d["group"] = _group_spec(a.group)
    d["prime"] = a.prime
    d["images"] = None if a.images is None else [int(x) for x in a.images.split(",")]
    return d


def run_resolution(p):
    w, M = _word(p["word"], p["rank"]), _group(p["group"])
    if p["images"] is not None:
        ok = foxcalc.verify_resolution_shadow(w, p["n"], p["images"], M, p["prime"])
        return {"checked": 1, "all_hold": ok}
    checked, ok = 0, True
    for images in itertools.product(range(M.order), repeat=w.rank):
        if p["n"] % M.element_order(M.evaluate(w, images)):
            continue
        checked += 1
        ok = ok and foxcalc.verify_resolution_shadow(w, p["n"], images, M, p["prime"])
    return {"checked": checked, "all_hold": ok}


def _in_group(a):
    return {"group": _group_spec(a.group)}


def run_group(p):
    G = _group(p["group"])
    return {
        "name": G.name,
        "order": G.order,
        "identity": G.identity,
        "class_sizes": [len(c) for c in G.conjugacy_classes],
        "classes": [list(c) for c in G.conjugacy_classes],
        "labels": [G.label(g) for g in range(G.order)],
    }


def _in_measure(a):
    d = _in_word(a)
    d.update(group=_group_spec(a.group), arity=a.arity, budget=a.budget)
    return d


def run_measure(p):
    return finquot.word_measure(_word(p["word"], p["rank"]), _group(p["group"]), p["arity"], p["budget"]).to_json()


def _in_equiv(a):
    d = _in_orbit(a)
    d["family"] = _family_spec(a.family)
    return d


def run_equiv(p):
    w1, w2 = _word(p["word1"], p["rank"]), _word(p["word2"], p["rank"])
    return finquot.profinite_equiv_test(w1, w2, [_group(s) for s in p["family"]], budget=p["budget"]).to_json()


def _in_count(a):
    rels = [_word(t, a.gens).text for t in a.relators]
    return {"generators": a.gens, "relators": rels, "group": _group_spec(a.group), "budget": a.budget}


def _presentation(p) -> finquot.Presentation:
    return finquot.Presentation.parse(p["generators"], p["relators"])


def run_homcount(p):
    return {"count": _big(finquot.count_homs(_presentation(p), _group(p["group"]), p["budget"]))}


def run_epicount(p):
    return {"count": _big(finquot.count_epis(_presentation(p), _group(p["group"]), p["budget"]))}


def _in_bprime(a):
    d = _in_word(a)
    gens = a.gens if a.gens is not None else d["rank"]
    d.update(generators=gens, primes=_primes(a.prime), family=_family_spec(a.family), budget=a.budget)
    d["word"] = _word(a.word, gens).text
    d["rank"] = gens
    return d


def run_bprime(p):
    a = _word(p["word"], p["rank"])
    return finquot.bprime_test(p["generators"], a, p["primes"], [_group(s) for s in p["family"]], p["budget"]).to_json()


def _in_rigidity(a):
    return {"rank": a.rank or 1, "max_len": a.max_len, "family": _family_spec(a.family), "budget": a.budget}


def run_rigidity(p):
    return finquot.rigidity_experiment(p["rank"], p["max_len"], [_group(s) for s in p["family"]], p["budget"]).to_json()


COMMANDS: dict[str, tuple[Callable, Callable]] = {
    "reduce": (_in_word, run_reduce),
    "orbit": (_in_orbit, run_orbit),
    "primitive": (_in_word, run_primitive),
    "closure": (_in_word, run_closure),
    "malnormal": (_in_malnormal, run_malnormal),
    "collapse": (_in_file, run_collapse),
    "gamma": (_in_file, run_gamma),
    "decide": (_in_file, run_decide),
    "britton": (_in_britton, run_britton),
    "edges": (_in_file, run_edges),
    "cohom": (_in_cohom, run_cohom),
    "sc-check": (_in_sc, run_sc_check),
    "sc-exponents": (_in_sc_exp, run_sc_exponents),
    "fox": (_in_word, run_fox),
    "tau": (_in_tau, run_tau),
    "trace": (_in_trace, run_trace),
    "resolution-check": (_in_resolution, run_resolution),
    "group": (_in_group, run_group),
    "measure": (_in_measure, run_measure),
    "equiv": (_in_equiv, run_equiv),
    "homcount": (_in_count, run_homcount),
    "epicount": (_in_count, run_epicount),
    "bprime": (_in_bprime, run_bprime),
    "rigidity": (_in_rigidity, run_rigidity),
}


# ---------------------------------------------------------------- parser


def _default_budget() -> int:
    raw = os.environ.get("PROFREE_BUDGET")
    if raw is None:
        return finquot.DEFAULT_TUPLE_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"PROFREE_BUDGET must be an integer, got {raw!r}") from None


def build_parser(budget: int) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the full JSON report")
    common.add_argument("--budget", type=int, default=budget, help="enumeration budget (env PROFREE_BUDGET)")
    common.add_argument("--rank", type=int, help="ambient free-group rank")

    parser = argparse.ArgumentParser(prog="profree", description="Exact computations with free groups, tubular groups and finite quotients.")
    parser.add_argument("--verify", metavar="FILE", help="replay a saved JSON report and compare it byte for byte")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    add("reduce", "freely reduce a word").add_argument("word")
    p = add("orbit", "decide whether two words lie in one Aut(F)-orbit")
    p.add_argument("word1")
    p.add_argument("word2")
    add("primitive", "decide primitivity").add_argument("word")
    add("closure", "algebraic closure of a word").add_argument("word")
    add("malnormal", "check a family of words for malnormality").add_argument("words", nargs="+")
    for name, text in (("collapse", "single-vertex HNN form"), ("gamma", "the labeled graph and its components"),
                       ("decide", "RF / LERF verdict"), ("edges", "edge-group closure descriptors")):
        add(name, text).add_argument("file", help="presentation JSON")
    p = add("britton", "Britton pinch reduction")
    p.add_argument("file")
    p.add_argument("word")
    p = add("cohom", "mod-p cohomology dimensions")
    p.add_argument("file")
    p.add_argument("--prime", type=int, required=True)
    for name, text in (("sc-check", "check C'(lambda)"), ("sc-exponents", "least uniform exponent for C'(lambda)")):
        p = add(name, text)
        p.add_argument("words", nargs="+")
        p.add_argument("--lambda", dest="lam", default="1/6")
    p.add_argument("--max-exponent", dest="exp_budget", type=int, default=smallcancel.DEFAULT_EXPONENT_BUDGET)
    p.add_argument("--family", default="")
    add("fox", "Fox derivatives").add_argument("word")
    p = add("tau", "row of the resolution map")
    p.add_argument("word")
    p.add_argument("n", type=int)
    p = add("trace", "trace element of F_p[Z/n]")
    p.add_argument("n", type=int)
    p.add_argument("--prime", type=int, required=True)
    p = add("resolution-check", "check the resolution identity in F_p[M]")
    p.add_argument("word")
    p.add_argument("n", type=int)
    p.add_argument("--group", required=True)
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--images", help="comma-separated generator images; default: every valid hom")
    add("group", "describe a finite group").add_argument("group")
    p = add("measure", "word measure on a finite group")
    p.add_argument("word")
    p.add_argument("--group", required=True)
    p.add_argument("--arity", type=int)
    p = add("equiv", "look for a group separating two word measures")
    p.add_argument("word1")
    p.add_argument("word2")
    p.add_argument("--family", required=True)
    for name, text in (("homcount", "count homomorphisms"), ("epicount", "count epimorphisms")):
        p = add(name, text)
        p.add_argument("relators", nargs="*")
        p.add_argument("--gens", type=int, required=True)
        p.add_argument("--group", required=True)
    p = add("bprime", "compare extension counts with |M|^(d-1)")
    p.add_argument("word")
    p.add_argument("--prime", default="")
    p.add_argument("--family", required=True)
    p.add_argument("--gens", type=int)
    p = add("rigidity", "orbit versus measure experiment")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--family", required=True)
    return parser


# ---------------------------------------------------------------- reporting


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def _flatten(prefix: str, value, out: list[str]) -> None:
    if isinstance(value, dict) and value:
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, list) and value and any(isinstance(v, (dict, list)) for v in value):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append(f"{prefix}: {json.dumps(value, ensure_ascii=False)}")


def render_text(report: dict) -> str:
    lines: list[str] = []
    _flatten("", report["result"], lines)
    return "\n".join(lines) + "\n"


def execute(command: str, params: dict) -> dict:
    if command not in COMMANDS:
        raise InputError(f"unknown command {command!r}")
    return {"schema": SCHEMA, "command": command, "input": params, "result": COMMANDS[command][1](params)}


def verify(path: str) -> bool:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        saved = json.loads(text)
        command, params = saved["command"], saved["input"]
        if saved.get("schema") != SCHEMA:
            raise InputError(f"unsupported report schema {saved.get('schema')!r}")
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"{path} is not a report: {exc}") from None
    return render_json(execute(command, params)) == text


def run(argv: Optional[list[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        parser = build_parser(_default_budget())
        args = parser.parse_args(argv)
        if args.verify:
            ok = verify(args.verify)
            print("verified" if ok else "MISMATCH", file=stdout)
            return EXIT_OK if ok else EXIT_MISMATCH
        if not args.command:
            parser.print_usage(stderr)
            return EXIT_INPUT
        params = COMMANDS[args.command][0](args)
        report = execute(args.command, params)
        stdout.write(render_json(report) if args.json else render_text(report))
        return EXIT_OK
    except InputError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=stderr)
        return EXIT_BUDGET
    except SystemExit as exc:
        # argparse reports usage errors with status 2
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
