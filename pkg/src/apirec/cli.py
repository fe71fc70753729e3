"""Command-line entry point: corpus stats, one-shot recommendation,
evaluation runs, and the HTTP service.

Exit codes: 0 on success, 2 for input problems (missing or malformed files,
bad flags), 3 when an evaluation skipped every project.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import evaluation, service
from .evaluation import AllProjectsSkippedError, EvalConfig, EvalReport

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_EMPTY_EVAL = 3

CONFIG_FLAGS = {"c11": "C1.1", "c12": "C1.2", "c21": "C2.1", "c22": "C2.2"}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _load_corpus(facts: str, snippets: str | None) -> corpus_mod.Corpus:
    facts_path = Path(facts)
    if not facts_path.is_file():
        raise CliError(f"facts file not found: {facts}")
    try:
        with facts_path.open("rb") as fp:
            loaded = corpus_mod.parse_facts(fp)
    except corpus_mod.CorpusError as exc:
        raise CliError(f"{facts}: {exc}") from exc
    if snippets:
        snippets_path = Path(snippets)
        if not snippets_path.is_file():
            raise CliError(f"snippets file not found: {snippets}")
        try:
            with snippets_path.open("rb") as fp:
                loaded = loaded.with_snippets(corpus_mod.load_snippets(fp))
        except corpus_mod.CorpusError as exc:
            raise CliError(f"{snippets}: {exc}") from exc
    return loaded


def _parse_int_list(raw: str, flag: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in raw.split(",") if part.strip())
    except ValueError as exc:
        raise CliError(f"{flag} expects comma-separated integers, got {raw!r}") from exc
    if not values or min(values) < 1:
        raise CliError(f"{flag} values must be positive integers")
    return values


def cmd_stats(args: argparse.Namespace) -> int:
    loaded = _load_corpus(args.facts, args.snippets)
    frequencies = sorted(
        (
            (canonical, loaded.stats(canonical))
            for canonical in loaded.vocabulary
        ),
        key=lambda kv: (-kv[1].declaration_count, kv[0]),
    )
    top = frequencies[:20]
    if args.json:
        print(
            json.dumps(
                {
                    "projects": len(loaded),
                    "declarations": loaded.declaration_total,
                    "vocabulary": len(loaded.vocabulary),
                    "snippets": len(loaded.snippets),
                    "top_invocations": [
                        {
                            "invocation": canonical,
                            "declaration_count": st.declaration_count,
                            "project_count": st.project_count,
                        }
                        for canonical, st in top
                    ],
                },
                indent=2,
                sort_keys=True,
            )
        )
    else:
        print(f"projects:      {len(loaded)}")
        print(f"declarations:  {loaded.declaration_total}")
        print(f"vocabulary:    {len(loaded.vocabulary)}")
        print(f"snippets:      {len(loaded.snippets)}")
        print("top invocations (by declaration count):")
        for rank, (canonical, st) in enumerate(top, start=1):
            print(f"  {rank:2d}. {canonical}  decls={st.declaration_count} projects={st.project_count}")
    return EXIT_OK


def cmd_recommend(args: argparse.Namespace) -> int:
    loaded = _load_corpus(args.facts, args.snippets)
    active_path = Path(args.active_file)
    if not active_path.is_file():
        raise CliError(f"active-context file not found: {args.active_file}")
    try:
        payload = json.loads(active_path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CliError(f"{args.active_file}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise CliError(f"{args.active_file}: expected a JSON object")
    for flag, key in (("k", "k"), ("M", "M"), ("N", "N"), ("snippet_count", "snippet_count")):
        value = getattr(args, flag)
        if value is not None:
            payload[key] = value
    try:
        response = service.run_query(loaded, payload)
    except service.BadRequest as exc:
        raise CliError(f"{args.active_file}: {exc}") from exc
    if args.json:
        print(json.dumps(response, indent=2, sort_keys=True))
        return EXIT_OK
    if response["fallback_used"]:
        print("(no similar declarations found; popularity fallback)")
    print("ranked invocations:")
    for api in response["apis"]:
        print(f"  {api['rank']:3d}. {api['invocation']}  score={api['score']:.6f}")
    if response["snippets"]:
        print("snippets:")
        for snip in response["snippets"]:
            print(f"  {snip['project']} :: {snip['declaration']}  jaccard={snip['score']:.4f}")
            if "body" in snip:
                for line in snip["body"].splitlines():
                    print(f"    | {line}")
            else:
                print(f"    sequence: {', '.join(snip['sequence'])}")
    print(f"elapsed: {response['elapsed_ms']:.2f} ms")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    loaded = _load_corpus(args.facts, args.snippets)
    configuration = CONFIG_FLAGS[args.config]
    folds = evaluation.TEN_FOLD if args.folds == "10" else evaluation.LEAVE_ONE_OUT
    k_values = _parse_int_list(args.k_list, "--k-list")
    n_values = _parse_int_list(args.n_list, "--n-list")
    jobs = args.jobs or os.cpu_count() or 1

    report: EvalReport | None = None
    try:
        for k in k_values:
            cfg = EvalConfig(
                configuration=configuration,
                k=k,
                m=args.M,
                n_values=n_values,
                folds=folds,
                seed=args.seed,
            )
            partial = evaluation.run_evaluation(loaded, cfg, jobs=jobs)
            report = partial if report is None else report.merge(partial)
    except AllProjectsSkippedError as exc:
        raise CliError(f"evaluation produced no rows: {exc}", code=EXIT_EMPTY_EVAL) from exc
    assert report is not None

    out_path = Path(args.out)
    with out_path.open("w", encoding="utf-8") as fp:
        report.write_json(fp)
    csv_path = out_path.with_suffix(".csv")
    with csv_path.open("w", encoding="utf-8") as fp:
        report.write_csv(fp)
    if args.timings:
        with Path(args.timings).open("w", encoding="utf-8") as fp:
            json.dump(report.timing_dict(), fp, indent=2, sort_keys=True)
            fp.write("\n")
    if args.json:
        print(json.dumps({"report": str(out_path), "csv": str(csv_path), "rows": len(report.rows)}))
    else:
        print(f"wrote {out_path} and {csv_path} ({len(report.rows)} rows)")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    host, _, port_text = args.listen.rpartition(":")
    if not host or not port_text.isdigit():
        raise CliError(f"--listen expects host:port, got {args.listen!r}")
    loaded = _load_corpus(args.facts, args.snippets)
    server = service.serve(loaded, host=host, port=int(port_text), verbose=not args.json)
    actual = server.server_address
    print(f"listening on http://{actual[0]}:{actual[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apirec",
        description="Collaborative-filtering recommendations of API invocations and snippets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_shared(p: argparse.ArgumentParser) -> None:
        p.add_argument("--facts", required=True, help="path to the facts file")
        p.add_argument("--snippets", help="path to the snippets file")
        p.add_argument("--seed", type=int, default=0, help="shuffling seed")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p_stats = sub.add_parser("stats", help="corpus counts and top invocations")
    add_shared(p_stats)
    p_stats.set_defaults(func=cmd_stats)

    p_rec = sub.add_parser("recommend", help="one-shot recommendation for a context file")
    add_shared(p_rec)
    p_rec.add_argument("--active-file", required=True, help="JSON file with context + active declaration")
    p_rec.add_argument("-k", type=int, default=None, help="neighbor projects")
    p_rec.add_argument("-M", type=int, default=None, help="neighbor declarations")
    p_rec.add_argument("-N", type=int, default=None, help="ranked-list cut-off")
    p_rec.add_argument("--snippet-count", dest="snippet_count", type=int, default=None)
    p_rec.set_defaults(func=cmd_recommend)

    p_eval = sub.add_parser("evaluate", help="run the simulation protocol")
    add_shared(p_eval)
    p_eval.add_argument("--config", required=True, choices=sorted(CONFIG_FLAGS))
    p_eval.add_argument("--folds", choices=["10", "loo"], default="10")
    p_eval.add_argument("--k-list", dest="k_list", default="4")
    p_eval.add_argument("--n-list", dest="n_list", default="1,5,10,15,20")
    p_eval.add_argument("-M", type=int, default=25, help="neighbor declarations")
    p_eval.add_argument("--out", default="eval-report.json", help="report path (.csv written alongside)")
    p_eval.add_argument("--timings", help="optional wall-clock sidecar path")
    p_eval.add_argument("--jobs", type=int, default=None, help="worker threads (default: CPUs)")
    p_eval.set_defaults(func=cmd_evaluate)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    add_shared(p_serve)
    p_serve.add_argument("--listen", default="127.0.0.1:8080", help="host:port to bind")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
