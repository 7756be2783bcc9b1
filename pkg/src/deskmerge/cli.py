"""Command-line client.

Runs the service in-process by default; with ``--server URL`` every
subcommand is forwarded to a running ``deskmerge serve`` instead.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from . import service
from .mapping import MappingError
from .scenarios import COMBINATIONS
from .solver import OracleTooLarge

log = logging.getLogger("deskmerge")

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class CliError(Exception):
    pass


class LocalClient:
    def merge(self, scenario: dict, mode: Optional[str], threads: int):
        return service.merge(scenario, mode, threads)

    def validate(self, scenario: dict):
        return service.validate(scenario)

    def retarget(self, merged: dict, stream: list[dict], params: dict, source_user: int):
        return service.retarget(merged, stream, params, source_user)

    def gen(self, combination: str, seed: int):
        return service.gen(combination, seed)


class HttpClient:
    def __init__(self, base_url: str, timeout: float = 600.0):
        import httpx

        self.http = httpx.Client(base_url=base_url.rstrip("/"), timeout=timeout)

    def _post(self, path: str, body: dict) -> dict:
        resp = self.http.post(path, json=body)
        if resp.status_code != 200:
            raise CliError(f"server rejected request ({resp.status_code}): {resp.text}")
        return resp.json()

    def merge(self, scenario, mode, threads):
        out = self._post("/merge", {"scenario": scenario, "mode": mode})
        return out["document"], out["exit_code"]

    def validate(self, scenario):
        out = self._post("/validate", {"scenario": scenario})
        return out["report"], out["exit_code"]

    def retarget(self, merged, stream, params, source_user):
        body = {"merged": merged, "stream": stream, "params": params, "source_user": source_user}
        return self._post("/retarget", body)["outputs"]

    def gen(self, combination, seed):
        return self._post("/gen", {"combination": combination, "seed": seed})


def _read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: malformed JSON: {exc}") from None


def _read_jsonl(path: str) -> list[dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: malformed record: {exc}") from None


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _validate_table(report: dict) -> str:
    lines = ["user  cells  obstacle  screen  proximity  surviving"]
    for u, r in enumerate(report["users"]):
        rm = r["removed"]
        lines.append(
            f"{u:<4}  {r['cells']:<5}  {rm['obstacle']:<8}  {rm['screen']:<6}  {rm['proximity']:<9}  {r['surviving']}"
        )
    lines.append("")
    lines.append("feasible anchors per screen:")
    for u, r in enumerate(report["users"]):
        for sid, n in sorted(r["feasible_anchors"].items()):
            lines.append(f"  user {u}  {sid:<20} {n}")
    pre = report["presolve"]
    lines.append("")
    lines.append(f"pre-solve pairs: {len(pre['fixed_pairs'])}")
    for p in pre["fixed_pairs"]:
        lines.append(f"  {p['shared']} -> {p['host']} (user {p['host_user']})")
    lines.append(f"residual screens per user: {pre['residual_counts']}")
    for w in report["warnings"]:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def cmd_merge(args, client) -> int:
    doc, code = client.merge(_read_json(args.scenario), args.mode, args.threads)
    _write(service.dumps(doc), args.out)
    if code == service.EXIT_OK:
        pre = doc["presolve"]
        log.info("pre-solve: %d fixed pairs, residual %s", len(pre["fixed_pairs"]), pre["residual_counts"])
    else:
        print(f"merge {doc['status']}: {doc.get('reason') or 'no layout'}", file=sys.stderr)
    return code


def cmd_validate(args, client) -> int:
    report, code = client.validate(_read_json(args.scenario))
    _write(service.dumps(report) if args.json else _validate_table(report), args.out)
    return code


def cmd_retarget(args, client) -> int:
    merged = _read_json(args.merged)
    stream = _read_jsonl(args.stream)
    params = _read_json(args.params) if args.params else {}
    outputs = client.retarget(merged, stream, params, args.source_user)
    _write("".join(json.dumps(o, sort_keys=True) + "\n" for o in outputs), args.out)
    return 0


def cmd_gen(args, client) -> int:
    if args.combination not in COMBINATIONS:
        raise CliError(f"unknown combination {args.combination!r}; choose from {', '.join(COMBINATIONS)}")
    _write(service.dumps(client.gen(args.combination, args.seed)), args.out)
    return 0


def cmd_serve(args, client) -> int:
    import uvicorn

    uvicorn.run("deskmerge.api:app", host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deskmerge", description="Merge two desk workspaces into shared layouts.")
    parser.add_argument("--server", help="forward to a running deskmerge service at this URL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("merge", help="solve a scenario and write the merged layouts")
    p.add_argument("--scenario", required=True)
    p.add_argument("--mode", choices=["exact", "beam", "oracle"])
    p.add_argument("--out")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("validate", help="report voxel filtering and anchor counts")
    p.add_argument("--scenario", required=True)
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("retarget", help="simulate avatar retargeting over a pose stream")
    p.add_argument("--merged", required=True, help="merge output document")
    p.add_argument("--stream", required=True, help="pose samples, one JSON object per line")
    p.add_argument("--out")
    p.add_argument("--params", help="JSON file overriding retargeting parameters")
    p.add_argument("--source-user", type=int, choices=[0, 1], default=0)
    p.set_defaults(func=cmd_retarget)

    p = sub.add_parser("gen", help="generate a study workspace combination")
    p.add_argument("combination", help="one of " + ", ".join(COMBINATIONS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    level = LOG_LEVELS.get(os.environ.get("DESKMERGE_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    client = HttpClient(args.server) if args.server else LocalClient()
    try:
        return args.func(args, client)
    except (CliError, MappingError, OracleTooLarge, ValueError) as exc:
        # ScenarioError is a ValueError and carries the document path
        print(f"error: {exc}", file=sys.stderr)
        return service.EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
