"""Command-line driver: gen, scramble, reconstruct, verify, clone-demo.

Exit codes: 0 pass, 1 verification failure, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from itertools import product
from pathlib import Path

import numpy as np

from .catalog import DEFAULT_MAX_ELEMENTS, BudgetExceeded, catalog_finite_ft, catalog_member, catalog_member_size
from .functions import DomainError, DomainSpec, all_transpositions
from .opaque import NotAssociative, conjugate_copy, point_labels, scramble_permutation, strip
from .reconstruct import ReconstructionError, extract_tau, reconstruct
from .records import (
    RecordError,
    clone_from_record,
    clone_record,
    dumps,
    read_records,
    semigroup_from_record,
    semigroup_record,
    write_records,
)

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _file_stem(label: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", label.lower()).strip("_")


def _emit(lines: list, out: str | None, name: str) -> Path | None:
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
        return None
    path = Path(out)
    if path.is_dir() or out.endswith("/"):
        path.mkdir(parents=True, exist_ok=True)
        path = path / name
    path.write_text(text, encoding="utf-8")
    return path


def _render(report: dict, fmt: str) -> list:
    if fmt == "json":
        return [dumps(report)]
    return [f"{k}: {v}" for k, v in report.items()]


# ---------------------------------------------------------------- gen

def cmd_gen(args) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    if args.clone:
        from .clone import clone_close

        size = args.size[0]
        dom = DomainSpec.finite(size)
        C = clone_close(all_transpositions(dom), args.cap)
        path = out / f"clone{size}_cap{args.cap}.jsonl"
        write_records(path, [clone_record(C)])
        print(f"wrote {path} ({C.total()} operations)")
        return EXIT_PASS
    for size in args.size:
        DomainSpec.finite(size)
        if args.rank_cap:
            members = []
            for cap in args.rank_cap:
                cap = None if cap == 0 else cap
                if catalog_member_size(size, cap) > DEFAULT_MAX_ELEMENTS:
                    raise BudgetExceeded(f"member of size {catalog_member_size(size, cap)} exceeds the budget")
                members.append(catalog_member(size, cap))
        else:
            members = catalog_finite_ft(size)
        if not members:
            print(f"no members over {size} points fit {DEFAULT_MAX_ELEMENTS} elements", file=sys.stderr)
        for S in members:
            path = out / f"{_file_stem(S.label)}.jsonl"
            write_records(path, [semigroup_record(S)])
            print(f"wrote {path} ({S.size} elements)")
    return EXIT_PASS


# ---------------------------------------------------------------- scramble

def _load_semigroup(path: str):
    recs = read_records(path)
    if len(recs) != 1:
        raise RecordError(f"{path}: expected one record")
    return semigroup_from_record(recs[0])


def cmd_scramble(args) -> int:
    S = _load_semigroup(args.input)
    M = strip(S, args.seed)
    new_of_old = scramble_permutation(S.size, args.seed)
    rec = semigroup_record(S, include_backing=False)
    rec["table"] = M.table.reshape(-1).tolist()
    rec["label"] = f"{S.label}@{args.seed}"
    if S.elements is not None:
        backing = [None] * S.size
        for old, new in enumerate(new_of_old):
            backing[new] = list(S.elements[old].map)
        rec["backing"] = backing
    lines = [dumps(rec)]
    path = _emit(lines, args.out, f"{_file_stem(rec['label'])}.jsonl")
    if path:
        print(f"wrote {path}")
    return EXIT_PASS


# ---------------------------------------------------------------- reconstruct

def reconstruct_report(S, seed: int | None) -> dict:
    """Scramble, reconstruct, extract the point bijection and compare with provenance."""
    report = {"seed": seed, "label": S.label, "elements": S.size}
    plain = strip(S, None)
    R0 = reconstruct(plain)
    report["points"] = len(R0.points)
    report["branch"] = R0.branch
    M = strip(S, seed)
    R1 = reconstruct(M)
    phi = scramble_permutation(S.size, seed)
    tau = extract_tau(R0, R1, phi)
    report["tau"] = tau.tolist()
    ok = True
    if S.elements is not None:
        truth = np.array([e.map for e in S.elements])
        lab0 = point_labels(plain, [h.rep for h in R0.points])
        lab1 = point_labels(M, [h.rep for h in R1.points])
        app_ok = bool(np.array_equal(lab0[R0.app], truth[:, lab0]))
        tau_ok = bool(np.array_equal(lab1[tau], lab0))  # a scramble plants the identity
        # planted conjugation
        sigma = np.random.default_rng([0 if seed is None else seed, 1]).permutation(S.domain.size)
        T, phi_c = conjugate_copy(S, sigma)
        N = strip(T, None if seed is None else seed + 1)
        phi_cn = scramble_permutation(T.size, None if seed is None else seed + 1)[phi_c]
        RN = reconstruct(N)
        tau_c = extract_tau(R0, RN, phi_cn)
        labn = point_labels(N, [h.rep for h in RN.points])
        conj_ok = bool(np.array_equal(labn[tau_c], sigma[lab0]))
        report.update(application_match=app_ok, scramble_tau_match=tau_ok,
                      planted_sigma=sigma.tolist(), conjugate_tau_match=conj_ok)
        ok = app_ok and tau_ok and conj_ok
    report["verdict"] = "match" if ok else "mismatch"
    return report


def cmd_reconstruct(args) -> int:
    S = _load_semigroup(args.input)
    seed = None if args.identity_scramble else args.seed
    try:
        report = reconstruct_report(S, seed)
    except (NotAssociative, ReconstructionError, ValueError) as exc:
        report = {"seed": seed, "label": S.label, "elements": S.size,
                  "verdict": "error", "error": f"{type(exc).__name__}: {exc}"}
    _emit(_render(report, args.format), args.out, "reconstruct_report." + ("jsonl" if args.format == "json" else "txt"))
    if report["verdict"] == "match":
        print(f"tau recovered, {S.size} elements, match", file=sys.stderr)
        return EXIT_PASS
    print(f"reconstruction failed: {report.get('error', 'mismatch')}", file=sys.stderr)
    return EXIT_FAIL


# ---------------------------------------------------------------- verify

def scoreboard_figure(rows: list, path: Path, title: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = [r["check"] for r in rows]
    passed = np.array([r["pass"] for r in rows])
    failed = np.array([r["fail"] for r in rows])
    fig, ax = plt.subplots(figsize=(8, 0.28 * len(rows) + 1.2))
    y = np.arange(len(rows))
    ax.barh(y, passed, color="#4c9a5b", label="pass")
    ax.barh(y, failed, left=passed, color="#c8443a", label="fail")
    ax.set_yticks(y, names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xscale("symlog")
    ax.set_xlabel("verdicts")
    ax.set_title(title, fontsize=9)
    ax.legend(loc="lower right", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def cmd_verify(args) -> int:
    from .verify import Scoreboard, catalog_campaign, clone_campaign, corpus_campaign

    ks = args.k or [4, 6]
    windows = args.window or [12, 16]
    sizes = args.size or [3, 4, 5]
    for s in sizes:
        DomainSpec.finite(s)
    configs = tuple(product(windows, ks))
    sb = Scoreboard()
    if not args.no_catalog:
        sb.merge(catalog_campaign(tuple(sizes)))
    if args.per_class > 0:
        sb.merge(corpus_campaign(args.per_class, args.seed, windows[0], ks[0], configs))
    if not args.no_clone:
        sb.merge(clone_campaign())
    rows = sb.rows()
    header = {"seed": args.seed, "per_class": args.per_class, "k": ks, "window": windows,
              "sizes": sizes, "checks": len(rows), "verdicts": sb.total, "all_pass": sb.all_pass}
    if args.format == "json":
        lines = [dumps({"header": header})] + [dumps(r) for r in rows]
    else:
        lines = [f"# seed={args.seed} per_class={args.per_class} k={ks} window={windows} sizes={sizes}"]
        lines += [f"{r['check']}\t{r['pass']}\t{r['fail']}" for r in rows]
        lines += [f"# all_pass={sb.all_pass} verdicts={sb.total}"]
    path = _emit(lines, args.out, "verify_report." + ("jsonl" if args.format == "json" else "txt"))
    if path is not None and rows:
        png = path.with_name(path.stem + "_scoreboard.png")
        scoreboard_figure(rows, png, f"seed {args.seed}, {sb.total} verdicts")
    if sb.total == 0:
        print("warning: empty campaign, vacuous pass", file=sys.stderr)
    for r in rows:
        for dump in r["counterexamples"]:
            print(f"counterexample {r['check']}: {json.dumps(dump, sort_keys=True)}", file=sys.stderr)
    return EXIT_PASS if sb.all_pass else EXIT_FAIL


# ---------------------------------------------------------------- clone demo

def clone_demo_report(C, seed: int) -> dict:
    from .clone import (
        clone_equivariant,
        clone_point_labels,
        clone_tau,
        conjugate_clone,
        is_semi_transitive,
        reconstruct_clone_action,
        recover_app_n,
        reveal_clone_provenance,
        scrambled_ids,
        strip_clone,
        tuple_codes,
    )

    size, cap = C.size, C.cap
    report = {"seed": seed, "points": size, "cap": cap,
              "operations": {str(n): C.count(n) for n in sorted(C.ops)},
              "semi_transitive": is_semi_transitive(C)}
    direct = all(np.array_equal(recover_app_n(C.ops[1], C.cmp[(n, 1)], n), C.ops[n])
                 for n in range(2, cap + 1))
    report["recovered_application_exact"] = direct
    M = strip_clone(C, seed)
    A = reconstruct_clone_action(M, cap)
    lab = clone_point_labels(M, A)
    _, backing = reveal_clone_provenance(M)
    prov_ok = True
    for n, ids in A.arity_ids.items():
        codes = tuple_codes(size, n)
        w = size ** np.arange(n - 1, -1, -1)
        for r, g in enumerate(ids):
            prov_ok &= bool(np.array_equal(lab[A.app[n][r]], backing[g][1][(lab[codes] * w).sum(axis=1)]))
    report["action_matches_provenance"] = prov_ok
    sigma = np.random.default_rng([seed, 2]).permutation(size)
    D, induced = conjugate_clone(C, sigma)
    N = strip_clone(D, seed + 1)
    B = reconstruct_clone_action(N, cap)
    gm, gn = scrambled_ids(C, seed), scrambled_ids(D, seed + 1)
    phi = np.empty(M.size, dtype=np.int64)
    for (n, i), g in gm.items():
        phi[g] = gn[(n, int(induced[n][i]))]
    tau = clone_tau(A, B, phi)
    labn = clone_point_labels(N, B)
    report["planted_sigma"] = sigma.tolist()
    report["equivariant"] = clone_equivariant(A, B, phi, tau)
    report["tau_matches_sigma"] = bool(np.array_equal(labn[tau], sigma[lab]))
    ok = all(report[k] for k in ("semi_transitive", "recovered_application_exact",
                                 "action_matches_provenance", "equivariant", "tau_matches_sigma"))
    report["verdict"] = "match" if ok else "mismatch"
    return report


def cmd_clone_demo(args) -> int:
    from .clone import clone_close

    if args.input:
        recs = read_records(args.input)
        C = clone_from_record(recs[0])
    else:
        size = (args.size or [3])[0]
        C = clone_close(all_transpositions(DomainSpec.finite(size)), args.cap)
    report = clone_demo_report(C, args.seed)
    _emit(_render(report, args.format), args.out, "clone_report." + ("jsonl" if args.format == "json" else "txt"))
    return EXIT_PASS if report["verdict"] == "match" else EXIT_FAIL


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ftrecon", description=__doc__,
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt=True):
        sp.add_argument("--seed", type=int, default=0, help="seed for every randomized choice")
        sp.add_argument("--out", default=None, help="output file or directory (default: stdout)")
        if fmt:
            sp.add_argument("--format", choices=("json", "text"), default="json")

    g = sub.add_parser("gen", help="write catalog semigroups or a clone as JSON-lines files")
    common(g, fmt=False)
    g.add_argument("--size", type=int, action="append", required=True, help="domain size (repeatable)")
    g.add_argument("--rank-cap", type=int, action="append",
                   help="rank cap of the extra maps; 0 means the symmetric group alone (default: all that fit)")
    g.add_argument("--clone", action="store_true", help="write the transposition clone instead")
    g.add_argument("--cap", type=int, default=2, help="arity cap for --clone")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("scramble", help="relabel element ids by a seeded permutation")
    common(s, fmt=False)
    s.add_argument("--in", dest="input", required=True)
    s.set_defaults(func=cmd_scramble)

    r = sub.add_parser("reconstruct", help="scramble, reconstruct and compare with provenance")
    common(r)
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--identity-scramble", action="store_true", help="keep element ids as stored")
    r.set_defaults(func=cmd_reconstruct)

    v = sub.add_parser("verify", help="dual-evaluation campaign with a per-check scoreboard")
    common(v)
    v.add_argument("--size", type=int, action="append", help="catalog domain sizes (default 3, 4, 5)")
    v.add_argument("--k", type=int, action="append", help="fresh point counts to sweep (default 4, 6)")
    v.add_argument("--window", type=int, action="append", help="windows to sweep (default 12, 16)")
    v.add_argument("--per-class", type=int, default=200, help="finitary instances per pair class")
    v.add_argument("--no-catalog", action="store_true")
    v.add_argument("--no-clone", action="store_true")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("clone-demo", help="clone reconstruction and conjugate-copy check")
    common(c)
    c.add_argument("--size", type=int, action="append")
    c.add_argument("--cap", type=int, default=2)
    c.add_argument("--in", dest="input", default=None)
    c.set_defaults(func=cmd_clone_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    try:
        return args.func(args)
    except (DomainError, RecordError, BudgetExceeded, FileNotFoundError, InputError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
