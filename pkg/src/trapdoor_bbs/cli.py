"""Command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Every command is
deterministic given its flags; randomness comes only from ``--rng-seed``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import adversary, classify, task
from .bits import BitString
from .errors import TaskError


class UsageError(Exception):
    pass


def _positive_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _tolerance(text):
    if text == "auto":
        return text
    return _positive_int(text)


def _emit(args, text: str) -> None:
    if getattr(args, "out_report", None):
        with open(args.out_report, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(args, header: dict, reports) -> str:
    if args.format == "flat":
        head = "".join(f"{k}={v}\n" for k, v in header.items())
        return head + "\n" + adversary.format_flat(reports)
    head = "# " + " ".join(f"{k}={v}" for k, v in header.items()) + "\n"
    return head + adversary.format_table(reports)


def _load_task(args, dataset=None):
    """Key and task params, with prefix/dummy taken from the dataset header."""
    key, params = task.read_key(args.key)
    if dataset is not None:
        if (dataset.seed_len, dataset.record_len) != (params.seed_len, params.record_len):
            raise UsageError("dataset geometry does not match the key file")
        if dataset.modulus != key.N:
            raise UsageError("dataset modulus does not match the key file")
        params = replace(params, include_seed_prefix=dataset.include_seed_prefix,
                         dummy_coordinate=dataset.dummy_coordinate)
    return key, params


def _build_classifier(args, key, params):
    kind = args.classifier
    if kind == "dummy":
        return classify.trivial_dummy_classify, {"classifier": "dummy"}
    if key is None:
        raise UsageError(f"--key is required for the {kind} classifier")
    t = classify.default_tolerance(params) if args.tolerance == "auto" else args.tolerance
    info = {"classifier": kind, "tolerance": t}
    if kind == "trapdoor":
        return classify.trapdoor_classifier(key, params, t), info
    info["radius"] = args.radius
    return classify.robust_classifier(key, params, classify.ClassifierConfig(t, args.radius)), info


def _dataset_header(ds) -> dict:
    return {"rng_seed": ds.rng_seed, "N": format(ds.modulus, "x"), "n": ds.seed_len,
            "len": ds.record_len, "prefix": int(ds.include_seed_prefix),
            "dummy": int(ds.dummy_coordinate), "samples": len(ds)}


# --- subcommands ------------------------------------------------------------

def cmd_keygen(args):
    if args.modulus_bits % 2 or args.modulus_bits < 6:
        raise UsageError(f"--modulus-bits must be even and at least 6, got {args.modulus_bits}")
    if args.modulus_bits < task.TINY_MODULUS_BITS and not args.toy:
        raise UsageError("moduli below 16 bits need --toy")
    overrides = {"include_seed_prefix": not args.no_prefix, "dummy_coordinate": args.dummy}
    if args.seed_len is not None:
        overrides["seed_len"] = args.seed_len
    if args.record_len is not None:
        overrides["record_len"] = args.record_len
    try:
        params = task.TaskParams.default(args.modulus_bits, **overrides)
    except TaskError as exc:
        raise UsageError(str(exc)) from None
    key, N = task.keygen(params, np.random.default_rng(args.rng_seed))
    task.write_key(args.out, key, params)
    task.write_public(args.out + ".pub", N, params)
    print(f"rng_seed={args.rng_seed}")
    print(f"N={N:x}")
    print(f"N_bits={N.bit_length()} seed_len={params.seed_len} record_len={params.record_len} "
          f"prefix={int(params.include_seed_prefix)} dummy={int(params.dummy_coordinate)}")
    print(f"wrote {args.out} and {args.out}.pub")


def cmd_gen(args):
    key, params = task.read_key(args.key)
    if args.no_prefix:
        params = replace(params, include_seed_prefix=False)
    if args.dummy:
        params = replace(params, dummy_coordinate=True)
    ds = task.make_dataset(key, params, args.count_per_class, args.rng_seed)
    task.write_dataset(args.out, ds)
    print(f"rng_seed={args.rng_seed} samples={len(ds)} width={ds.width} wrote {args.out}")


def cmd_classify(args):
    key = None
    if args.record is not None:
        if args.key is None:
            raise UsageError("--key is required")
        key, params = task.read_key(args.key)
        if args.dummy:
            params = replace(params, dummy_coordinate=True)
        clf, _ = _build_classifier(args, key, params)
        try:
            record = BitString.from_str(args.record)
        except TaskError as exc:
            raise UsageError(str(exc)) from None
        _emit(args, f"{clf(record)}\n")
        return
    if args.data is None:
        raise UsageError("one of --data or --record is required")
    ds = task.read_dataset(args.data)
    if args.key is not None:
        key, params = _load_task(args, ds)
    else:
        params = ds.params()
    clf, _ = _build_classifier(args, key, params)
    _emit(args, "".join(f"{clf(s.record)}\n" for s in ds.samples))


def cmd_eval(args):
    ds = task.read_dataset(args.data)
    key, params = _load_task(args, ds) if args.key else (None, ds.params())
    clf, info = _build_classifier(args, key, params)
    report = adversary.eval_accuracy(clf, ds)
    _emit(args, _render(args, {"command": "eval", **_dataset_header(ds), **info}, [report]))


def cmd_attack(args):
    ds = task.read_dataset(args.data)
    key, params = _load_task(args, ds) if args.key else (None, ds.params())
    if args.only_label is not None:
        ds = ds.subset([i for i, s in enumerate(ds.samples) if s.label == args.only_label])
        if len(ds) == 0:
            raise UsageError(f"no samples with label {args.only_label}")
    clf, info = _build_classifier(args, key, params)
    caps = []
    if params.include_seed_prefix:
        if args.prefix_budget is not None:
            caps.append((range(params.seed_len), args.prefix_budget))
        if args.suffix_budget is not None:
            caps.append((range(params.seed_len, ds.width), args.suffix_budget))
    elif args.prefix_budget is not None or args.suffix_budget is not None:
        raise UsageError("prefix/suffix budgets need a prefix-mode dataset")
    plain = adversary.eval_accuracy(clf, ds)
    robust = adversary.eval_robust_accuracy(clf, ds, args.budget, caps=caps or None,
                                            exhaustive=args.exhaustive,
                                            name=f"robust_budget{args.budget}")
    header = {"command": "attack", **_dataset_header(ds), **info, "budget": args.budget,
              "prefix_budget": args.prefix_budget, "suffix_budget": args.suffix_budget,
              "mode": "exhaustive" if args.exhaustive else "greedy"}
    _emit(args, _render(args, header, [plain, robust]))


def cmd_baseline(args):
    if args.key is not None:
        raise UsageError("baseline runs without the trapdoor: --key is not allowed")
    ds = task.read_dataset(args.data)
    train, test = adversary.split_dataset(ds, args.train_frac)
    reports = adversary.score_distinguishers(adversary.fit_distinguishers(train), test)
    reports.append(adversary.train_linear_baseline(train, test, args.epochs, args.step_size))
    header = {"command": "baseline", **_dataset_header(ds), "train_frac": args.train_frac,
              "epochs": args.epochs, "step_size": args.step_size}
    _emit(args, _render(args, header, reports))


def _default_grid(m: int) -> list[int]:
    if m <= 16:
        return list(range(m + 1))
    return sorted({0, 1, 2} | {m // k for k in (64, 32, 16, 8, 6, 4, 3, 2)} | {m})


def cmd_margin(args):
    key = None
    if args.key is not None:
        key, params = task.read_key(args.key)
        n, m = params.seed_len, params.record_len
        if args.no_prefix:
            params = replace(params, include_seed_prefix=False)
    else:
        if args.seed_len is None or args.record_len is None:
            raise UsageError("--seed-len and --record-len are required without --key")
        n, m = args.seed_len, args.record_len
    grid = _default_grid(m) if args.d is None else args.d
    bad = [d for d in grid if not 0 <= d <= m]
    if bad:
        raise UsageError(f"--d values must lie in [0, record_len={m}], got {bad}")
    hist = None
    note = ""
    if args.exact:
        if key is None:
            raise UsageError("--exact needs --key")
        if n <= classify.ORACLE_MAX_SEED_LEN and m <= classify.COVERAGE_MAX_RECORD_LEN:
            hist = classify.support_distance_histogram(key, params)
        else:
            note = "# exact values skipped: parameters exceed enumeration capacity\n"
    rows = []
    for d in grid:
        bound = classify.margin_bound_exact(n, m, d)
        row = {"d": d, "bound": _sci(bound), "log10_bound": f"{classify.log10_fraction(bound):.3f}"}
        if hist is not None:
            exact = int(hist[: d + 1].sum()) / (1 << m)
            row["exact"] = f"{exact:.6e}"
        rows.append(row)
    if args.format == "flat":
        text = f"seed_len={n}\nrecord_len={m}\n" + "".join(
            "\n" + "".join(f"{k}={v}\n" for k, v in row.items()) for row in rows)
    else:
        cols = list(rows[0])
        widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) for c in cols}
        text = f"# margin seed_len={n} record_len={m}\n" + note
        text += "  ".join(c.rjust(widths[c]) for c in cols) + "\n"
        text += "".join("  ".join(str(r[c]).rjust(widths[c]) for c in cols) + "\n" for r in rows)
    _emit(args, text)


def _sci(x) -> str:
    """Scientific notation that survives values far below float range."""
    if x == 0:
        return "0"
    lg = classify.log10_fraction(x)
    exp = int(np.floor(lg))
    mant = 10 ** (lg - exp)
    if mant >= 9.9995:
        mant, exp = 1.0, exp + 1
    return f"{mant:.3f}e{exp:+d}"


# --- parser -----------------------------------------------------------------

def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trapdoor-bbs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def report_opts(p):
        p.add_argument("--format", choices=("text", "flat"), default="text")
        p.add_argument("--out", dest="out_report", help="write the report here instead of stdout")

    def classifier_opts(p, default="trapdoor"):
        p.add_argument("--classifier", choices=("trapdoor", "robust", "dummy"), default=default)
        p.add_argument("--tolerance", type=_tolerance, default="auto",
                       help="suffix mismatches tolerated, or 'auto' = (record_len - seed_len) // 4")
        p.add_argument("--radius", type=_positive_int, default=0,
                       help="seed-prefix flips searched by the robust classifier")

    p = sub.add_parser("keygen", help="generate a trapdoor key and task parameters")
    p.add_argument("--modulus-bits", type=int, required=True)
    p.add_argument("--seed-len", type=_positive_int)
    p.add_argument("--record-len", type=_positive_int)
    p.add_argument("--no-prefix", action="store_true")
    p.add_argument("--dummy", action="store_true")
    p.add_argument("--toy", action="store_true", help="allow moduli below 16 bits")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("gen", help="sample a labeled dataset")
    p.add_argument("--key", required=True)
    p.add_argument("--count-per-class", type=_positive_int, required=True)
    p.add_argument("--no-prefix", action="store_true", help="omit the seed prefix from label-1 records")
    p.add_argument("--dummy", action="store_true", help="append a label-revealing coordinate")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("classify", help="print one predicted label per record")
    p.add_argument("--key")
    p.add_argument("--data")
    p.add_argument("--record", help="a single record as a 0/1 string")
    p.add_argument("--dummy", action="store_true", help="--record carries a dummy coordinate")
    p.add_argument("--out", dest="out_report")
    classifier_opts(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="plain accuracy of a classifier")
    p.add_argument("--key")
    p.add_argument("--data", required=True)
    classifier_opts(p)
    report_opts(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("attack", help="robust accuracy under greedy or exhaustive bit flips")
    p.add_argument("--key")
    p.add_argument("--data", required=True)
    p.add_argument("--budget", type=_positive_int, required=True, help="total flips allowed")
    p.add_argument("--prefix-budget", type=_positive_int)
    p.add_argument("--suffix-budget", type=_positive_int)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--only-label", type=int, choices=(0, 1))
    classifier_opts(p)
    report_opts(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("baseline", help="trapdoor-free distinguishers and a linear learner")
    p.add_argument("--data", required=True)
    p.add_argument("--key", help=argparse.SUPPRESS)
    p.add_argument("--train-frac", type=float, default=0.5)
    p.add_argument("--epochs", type=_positive_int, default=5)
    p.add_argument("--step-size", type=float, default=0.01)
    report_opts(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("margin", help="union bound on uniform records near the support")
    p.add_argument("--seed-len", type=_positive_int)
    p.add_argument("--record-len", type=_positive_int)
    p.add_argument("--d", type=_int_list, help="comma-separated Hamming distances")
    p.add_argument("--key")
    p.add_argument("--no-prefix", action="store_true")
    p.add_argument("--exact", action="store_true", help="add enumerated coverage beside the bound")
    report_opts(p)
    p.set_defaults(func=cmd_margin)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        parser.error(f"{args.command}: {exc}")
    except (TaskError, OSError) as exc:
        print(f"trapdoor-bbs {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
