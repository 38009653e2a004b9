"""Command line driver: verification campaigns, builders, eigenfunction sweeps, reports.

Exit codes: 0 when every identity has its expected outcome, 1 when some
identity does not, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from . import builders as bld
from . import checks as chk
from . import models as mdl
from .exactfield import VariableRegistry

log = logging.getLogger("dynrefl")

SUITES = ("paper", "findings")
MODES = ("exact", "random")
BUILDERS = ("bcd-from-a", "dual", "fuse", "dress", "monodromy", "hamiltonian")


class ConfigError(ValueError):
    pass


@dataclass
class Item:
    name: str
    run: Callable[[str, int], chk.VerificationReport]
    expect: bool = True


def _named(rep: chk.VerificationReport, name: str) -> chk.VerificationReport:
    rep.identity = name
    return rep


def _all(name: str, anchor: str, reps) -> chk.VerificationReport:
    return chk.combine(name, list(reps), anchor)


def reference_suite(n: int) -> list[Item]:
    """Every displayed identity that the rational model is expected to satisfy."""
    m = mdl.rational_model(n)
    Q, reg = m.quad, m.reg
    T = bld.quantum_copy(Q.A, "a")
    g = {k: mdl.gamma_solution(k, reg) for k in ("rank_one", "antisym_scaled", "diagonal")}
    items = [
        Item("unitarity", lambda mo, s: chk.check_unitarity(Q, mo, s)),
        Item("zero-weight", lambda mo, s: chk.check_zero_weight(Q)),
    ]
    for v in "abcd":
        items.append(Item(f"dYBE-{v}", lambda mo, s, v=v: chk.check_dYBE(Q, v, chk.NEW, mo, s)))
    for k, G in g.items():
        items.append(Item(f"reflection[{k}]", lambda mo, s, G=G, k=k: _named(chk.check_reflection(G, Q, chk.NEW, mo, s), f"reflection[{k}]")))

    def bcd(mo, s):
        q = bld.build_BCD_from_A(Q.A)
        reps = [chk.check_dYBE(q, v, chk.NEW, mo, s) for v in "abcd"]
        reps.append(chk.check_products("D12D21=I", [chk.term(q.D), chk.term(chk.on(q.D, "2", "1"))],
                                       [chk.term(chk.TensorMatrix.identity(reg, q.D.legs))], q.D.legs, mo, s))
        return _all("BCD-from-A", "theo:solBCD", reps)

    items.append(Item("BCD-from-A", bcd))
    items.append(Item("RLL", lambda mo, s: chk.check_RLL(T, Q.A, mo, s)))
    items.append(Item("crossed-exchange", lambda mo, s: chk.check_crossed_exchange(T, bld.build_transposed_lax(T), Q, mo, s)))
    items.append(Item("K=TgT[diagonal]", lambda mo, s: _named(
        chk.check_reflection(bld.build_K_from_T_gamma(T, g["diagonal"]), Q, chk.NEW, mo, s), "K=TgT[diagonal]")))
    items.append(Item("monodromy-RLL[2 sites]", lambda mo, s: _named(chk.check_RLL(bld.monodromy(Q.A, 2), Q.A, mo, s), "monodromy-RLL[2 sites]")))
    for alpha, L, J in ((1, Q.C, Q.D), (-1, Q.A, Q.B)):
        L1, J1 = bld.quantum_copy(L, "a"), bld.quantum_copy(J, "a")

        def coact(mo, s, L1=L1, J1=J1, alpha=alpha):
            reps = [chk.check_coaction(L1, J1, Q, alpha, mo, s)]
            Kt = bld.coaction_dress(g["diagonal"], L1, J1, alpha)
            reps.append(chk.check_reflection(Kt, Q, chk.NEW, mo, s, name="dressed-reflection"))
            return _all(f"coaction[alpha={alpha}]", "theo:dressK", reps)

        items.append(Item(f"coaction[alpha={alpha}]", coact))
    for side in ("left", "right"):
        items.append(Item(f"fusion-{side}", lambda mo, s, side=side: _all(
            f"fusion-{side}", "lem:fus" if side == "left" else "lem:fus2",
            [bld.fuse(G, G, Q, side).exchange_report(G, mo, s) for G in (g["rank_one"], g["diagonal"])])))
    items.append(Item("fused-order", lambda mo, s: _all("fused-order", "lem:fus/lem:fus2", bld.fused_order_reports(Q))))
    items.append(Item("fused-unitarity", lambda mo, s: _all("fused-unitarity", "lem:fus2", bld.fused_unitarity_reports(Q))))
    for sp in (2, 3):
        def dress(mo, s, sp=sp):
            Qd, S = bld.build_dressing_QS(Q, sp)
            return bld.dressing_report(Q, Qd, S, mode=mo, seed=s)

        items.append(Item(f"dressing[{sp} spaces]", dress))

    def dual(mo, s):
        d = bld.build_dual_ABCD(Q)
        Kp = bld.build_Kplus_crossing(g["diagonal"])
        reps = [chk.check_products("C~12=B~21", [chk.term(d.C)], [chk.term(chk.on(d.B, "2", "1"))], d.A.legs, mo, s),
                chk.check_dual_reflection(Kp, d, mo, s)]
        return _all("dual", "dynKdual", reps)

    items.append(Item("dual", dual))

    def ham(mo, s):
        H = mdl.hamiltonian_from_pair(g["rank_one"], g["diagonal"])
        ok = H.equals(mdl.hamiltonian_closed_form(reg))
        return chk.VerificationReport("hamiltonian", "Ham-ex", "exact", None, ok,
                                      None if ok else {"row": [], "col": [], "residual": (H - mdl.hamiltonian_closed_form(reg)).to_text()})

    items.append(Item("hamiltonian", ham))
    items.append(Item("commutator[H,translation]", lambda mo, s: chk.check_commutator_zero(
        mdl.hamiltonian_closed_form(reg), mdl.total_translation(reg), "commutator[H,translation]")))
    if n == 2:
        def rel(mo, s):
            R = mdl.reduce_n2(mdl.hamiltonian_closed_form(reg))
            ok = R.equals(mdl.printed_relative_form(R.reg))
            return chk.VerificationReport("relative-form", "Ham-ex (n=2)", "exact", None, ok)

        items.append(Item("relative-form", rel))
    items.append(Item("classical-limit", lambda mo, s: chk.check_classical_limit(Q)))
    return items


def findings_suite(n: int) -> list[Item]:
    """Identities that hold only after a correction, or whose outcome is data."""
    m = mdl.rational_model(n)
    Q, reg = m.quad, m.reg
    P = mdl.rational_model(n, "printed").quad
    T = bld.quantum_copy(Q.A, "a")
    g = {k: mdl.gamma_solution(k, reg) for k in ("rank_one", "antisym_scaled", "diagonal")}
    items = [
        Item("printed-D:dYBE-d", lambda mo, s: _named(chk.check_dYBE(P, "d", chk.NEW, mo, s), "printed-D:dYBE-d"), False),
        Item("printed-D:equals-A", lambda mo, s: chk.VerificationReport(
            "printed-D:equals-A", "rational model display", "exact", None, P.D.equals(P.A))),
        Item("printed-D:from-A", lambda mo, s: _named(chk.check_products(
            "D from A", [chk.term(P.D)], [chk.term(bld.build_BCD_from_A(Q.A).D)], Q.A.legs, mo, s), "printed-D:from-A"), False),
        Item("K=TgT:+h[antisym_scaled]", lambda mo, s: _named(chk.check_reflection(
            bld.build_K_from_T_gamma(T, g["antisym_scaled"], gamma_shift=1), Q, chk.NEW, mo, s), "K=TgT:+h[antisym_scaled]"), False),
        Item("K=TgT:+h[diagonal]", lambda mo, s: _named(chk.check_reflection(
            bld.build_K_from_T_gamma(T, g["diagonal"], gamma_shift=1), Q, chk.NEW, mo, s), "K=TgT:+h[diagonal]"), False),
        Item("gamma-shiftless[rank_one]", lambda mo, s: chk.check_scalar_gamma_condition(g["rank_one"], Q, mo, s)),
    ]
    if n == 2:
        items.append(Item("dressing:printed-Q[3 spaces]", lambda mo, s: _named(
            bld.dressing_report(Q, *bld.build_dressing_QS(Q, 3, q_shift=1), mode=mo, seed=s), "dressing:printed-Q[3 spaces]"), False))
    items.append(Item("classical-limit:printed-c", lambda mo, s: chk.check_classical_limit(Q, c_form="printed"), False))
    d = None

    def dual_reps():
        nonlocal d
        d = d or bld.build_dual_ABCD(Q)
        return d

    for k in ("D", "C", "B"):
        items.append(Item(f"dual:{k}~ from A~", lambda mo, s, k=k: next(
            r for r in bld.dual_structure_reports(dual_reps()) if r.identity == f"{k}~ from A~"), k == "D"))
    for v in "abcd":
        items.append(Item(f"dual:dYBE-{v}", lambda mo, s, v=v: _named(chk.check_dYBE(dual_reps(), v, chk.NEW, mo, s), f"dual:dYBE-{v}"), v in "ab"))
    semi = chk.SEMI_DYNAMICAL
    for k, G in g.items():
        items.append(Item(f"semi-dynamical:reflection[{k}]", lambda mo, s, G=G, k=k: _named(
            chk.check_reflection(G, Q, semi, mo, s), f"semi-dynamical:reflection[{k}]"), k == "rank_one"))
    if n == 2:
        items.append(Item("fused-trace-commutator", lambda mo, s: mdl.fused_trace_experiment(n), False))
    return items


SUITE_BUILDERS = {"paper": reference_suite, "findings": findings_suite}


def _run_one(args) -> dict:
    suite, n, mode, seed, idx, timing = args
    item = SUITE_BUILDERS[suite](n)[idx]
    rep = item.run(mode, seed)
    out = rep.to_json(timing=timing)
    out["expected"] = item.expect
    out["item"] = item.name
    return out


def run_campaign(suite: str, n: int, mode: str, seed: int, jobs: int = 1, timing: bool = True) -> list[dict]:
    if suite not in SUITE_BUILDERS:
        raise ConfigError(f"unknown suite {suite!r}; expected one of {SUITES}")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
    if n < 2:
        raise ConfigError("n must be >= 2")
    if mode == "exact" and n > 3:
        log.warning("exact mode at n=%d: three-leg checks grow like n^6 entries", n)
    count = len(SUITE_BUILDERS[suite](n))
    tasks = [(suite, n, mode, seed, i, timing) for i in range(count)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_run_one, tasks))
    return [_run_one(t) for t in tasks]


def _slug(name: str) -> str:
    keep = [c if c.isalnum() or c in "-_" else "_" for c in name]
    return "".join(keep).strip("_")


def markdown_table(results: list[dict], title: str) -> str:
    timing = any("millis" in r for r in results)
    head = "| identity | anchor | mode | seed | result | expected |" + (" millis |" if timing else "")
    lines = [f"# {title}", "", head, "|---" * (7 if timing else 6) + "|"]
    for r in results:
        res = "pass" if r["pass"] else "FAIL"
        exp = "pass" if r.get("expected", True) else "fail"
        row = f"| {r['item']} | {r['anchor']} | {r['mode']} | {r['seed']} | {res} | {exp} |"
        lines.append(row + (f" {r.get('millis', '')} |" if timing else ""))
    ok = sum(1 for r in results if r["pass"] == r.get("expected", True))
    lines += ["", f"{ok}/{len(results)} identities have their expected outcome."]
    return "\n".join(lines) + "\n"


def write_reports(results: list[dict], out: Path, title: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for i, r in enumerate(results):
        (out / f"{i:02d}_{_slug(r['item'])}.json").write_text(json.dumps(r, indent=2, sort_keys=True) + "\n")
    (out / "summary.md").write_text(markdown_table(results, title))


def load_config(path: Path) -> list[dict]:
    """Campaigns from an INI file: one ``[campaign NAME]`` section per campaign.

    Keys: ``suite`` (paper|findings), ``n`` (int), ``mode`` (exact|random),
    ``seed`` (int), ``out`` (directory), ``jobs`` (int).
    """
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    camps = []
    for sec in cp.sections():
        if not sec.startswith("campaign"):
            raise ConfigError(f"unexpected section [{sec}] (sections must be named 'campaign NAME')")
        s = cp[sec]
        unknown = set(s) - {"suite", "n", "mode", "seed", "out", "jobs"}
        if unknown:
            raise ConfigError(f"[{sec}]: unknown keys {sorted(unknown)}")
        try:
            camps.append({
                "name": sec.split(None, 1)[1] if " " in sec else "campaign",
                "suite": s.get("suite", "paper"),
                "n": s.getint("n", 2),
                "mode": s.get("mode", "exact"),
                "seed": s.getint("seed", 0),
                "out": s.get("out", None),
                "jobs": s.getint("jobs", 1),
            })
        except ValueError as exc:
            raise ConfigError(f"[{sec}]: {exc}") from None
    if not camps:
        raise ConfigError(f"{path}: no campaign sections")
    return camps


# ------------------------------------------------------------------------------------
# subcommands


def cmd_verify(args) -> int:
    if args.config:
        camps = load_config(Path(args.config))
    else:
        camps = [{"name": f"{args.suite}-n{args.n}-{args.mode}", "suite": args.suite, "n": args.n,
                  "mode": args.mode, "seed": args.seed, "out": args.out, "jobs": args.jobs}]
    status = 0
    for c in camps:
        results = run_campaign(c["suite"], c["n"], c["mode"], c["seed"], c["jobs"], not args.no_timing)
        title = f"{c['suite']} suite, n={c['n']}, mode={c['mode']}, seed={c['seed']}"
        if c["out"]:
            write_reports(results, Path(c["out"]), title)
        for r in results:
            flag = "ok " if r["pass"] == r["expected"] else "BAD"
            print(f"{flag} {r['item']:<40} {'pass' if r['pass'] else 'fail'} (expected {'pass' if r['expected'] else 'fail'})")
        bad = [r for r in results if r["pass"] != r["expected"]]
        print(f"{c['name']}: {len(results) - len(bad)}/{len(results)} as expected")
        if bad:
            status = 1
    return status


def _build(what: str, n: int) -> dict:
    reg = VariableRegistry.standard(n)
    m = mdl.rational_model(n, reg=reg)
    Q = m.quad
    if what == "bcd-from-a":
        return bld.build_BCD_from_A(Q.A, strict=True).to_json()
    if what == "dual":
        return bld.build_dual_ABCD(Q, strict=True).to_json()
    if what == "fuse":
        G = mdl.gamma_solution("rank_one", reg)
        res = bld.fuse(G, G, Q, "left", strict=True)
        return {"K": res.K.to_json(), **{k: v.to_json() for k, v in res.matrices.items()}}
    if what == "dress":
        Qd, S = bld.build_dressing_QS(Q, 2, strict=True)
        return {"Q": Qd.to_json(), "S": S.to_json()}
    if what == "monodromy":
        return bld.monodromy(Q.A, 2, strict=True).to_json()
    if what == "hamiltonian":
        H = mdl.hamiltonian_from_pair(mdl.gamma_solution("rank_one", reg), mdl.gamma_solution("diagonal", reg))
        return {"registry": list(reg.names), "terms": H.to_json()}
    raise ConfigError(f"unknown builder {what!r}")


def cmd_build(args) -> int:
    data = _build(args.what, args.n)
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_eigen(args) -> int:
    e = mdl.Eigenfunction(args.k, args.parity, args.m1, args.m2, args.mu, args.exponent)
    pts = mdl.sample_points(args.mu, args.samples, args.seed)
    rows = []
    for q in pts:
        rows.append((q, mdl.eigenfunction_value(e, q), mdl.relative_residual(e, q)))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["q", "value", "residual"])
        for q, v, r in rows:
            w.writerow([repr(q), repr(v), repr(r)])
    finally:
        if args.out:
            out.close()
    worst = max(r for _, _, r in rows)
    print(f"k={args.k} parity={args.parity} m1={args.m1} m2={args.m2} mu={args.mu} exponent={args.exponent}: "
          f"max relative residual {worst:.3e} over {len(rows)} samples", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    d = Path(args.directory)
    files = sorted(p for p in d.glob("*.json"))
    if not files:
        raise ConfigError(f"no report JSON files in {d}")
    results = [json.loads(p.read_text()) for p in files]
    for r in results:
        r.setdefault("item", r["identity"])
    text = markdown_table(results, f"reports in {d}")
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if all(r["pass"] == r.get("expected", True) for r in results) else 1


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dynrefl", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification campaign")
    v.add_argument("--suite", choices=SUITES, default="paper")
    v.add_argument("--n", type=int, default=2)
    v.add_argument("--mode", choices=MODES, default="exact")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", help="directory for per-identity JSON and summary.md")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--config", help="INI file with [campaign NAME] sections")
    v.add_argument("--no-timing", action="store_true", help="omit wall-clock fields so reruns are byte-identical")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("build", help="emit a constructed object as JSON")
    b.add_argument("what", choices=BUILDERS)
    b.add_argument("--n", type=int, default=2)
    b.add_argument("--out")
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("eigen", help="sample a zero mode of the relative Hamiltonian (CSV)")
    e.add_argument("--k", type=int, default=1)
    e.add_argument("--parity", choices=("sin", "cos"), default="sin")
    e.add_argument("--m1", type=float, default=1.0)
    e.add_argument("--m2", type=float, default=1.0)
    e.add_argument("--mu", type=float, default=1.0)
    e.add_argument("--samples", type=int, default=20)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--exponent", choices=mdl.EXPONENT_MODES, default="derived")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eigen)

    r = sub.add_parser("report", help="aggregate report JSON files into a markdown table")
    r.add_argument("directory")
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        if args.command == "verify" or args.command == "build":
            print(f"error: {exc}", file=sys.stderr)
            return 2
        raise


if __name__ == "__main__":
    sys.exit(main())
