"""Command-line client for the synthesis service.

By default commands run against an in-process instance of the service
(no server required); `--server URL` targets a running deployment
instead. Exit codes: 0 when the tool succeeded and the answer is
positive (certified / satisfied), 2 when the tool succeeded but the
answer is negative, 1 on any error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .artifacts import render_report

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2


def _make_client(server: str | None):
    import httpx
    if server:
        return httpx.Client(base_url=server, timeout=None)
    from .service import app

    class _InProcess(httpx.BaseTransport):
        """Synchronous bridge to the ASGI app; no socket involved."""

        def __init__(self, asgi_app):
            self._asgi = httpx.ASGITransport(app=asgi_app)

        def handle_request(self, request: httpx.Request) -> httpx.Response:
            import asyncio

            async def call():
                response = await self._asgi.handle_async_request(request)
                content = b"".join([part async for part in response.stream])
                await response.aclose()
                return httpx.Response(response.status_code,
                                      headers=response.headers, content=content)

            return asyncio.run(call())

    return httpx.Client(transport=_InProcess(app),
                        base_url="http://episynth.internal", timeout=None)


def _post(client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise RuntimeError(f"{path} failed ({response.status_code}): {detail}")
    return response.json()


def _write(directory: Path, name: str, content: str) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / name
    path.write_text(content, encoding="utf-8")
    return path


def _common_payload(args, scenario_path: str) -> dict:
    payload = {"scenario": Path(scenario_path).read_text(encoding="utf-8")}
    if args.seed is not None:
        payload["seed"] = args.seed
    return payload


def cmd_synthesize(client, args) -> int:
    payload = _common_payload(args, args.scenario)
    payload["mode"] = args.mode
    data = _post(client, "/synthesize", payload)
    out = Path(args.output_dir)
    _write(out, "control.csv", data["control_csv"])
    _write(out, "trajectory.csv", data["trajectory_csv"])
    _write(out, "report.json", render_report(data["report"]))
    certified = data["certified"]
    print(f"certified: {certified}  control effort: {data['control_effort']:.9g}")
    return EXIT_OK if certified else EXIT_NEGATIVE


def cmd_verify(client, args) -> int:
    payload = _common_payload(args, args.scenario)
    payload["mode"] = args.mode
    payload["samples"] = args.samples
    if args.control is not None:
        payload["control_csv"] = Path(args.control).read_text(encoding="utf-8")
    data = _post(client, "/verify", payload)
    out = Path(args.output_dir)
    _write(out, "report.json", render_report(data["report"]))
    satisfied = data["satisfied"]
    interval = data["report"]["robustness_interval"]
    print(f"satisfied: {satisfied}  worst-case robustness in "
          f"[{interval['lo']:.9g}, {interval['hi']:.9g}]")
    return EXIT_OK if satisfied else EXIT_NEGATIVE


def cmd_simulate(client, args) -> int:
    payload = _common_payload(args, args.scenario)
    if args.control is not None:
        payload["control_csv"] = Path(args.control).read_text(encoding="utf-8")
    data = _post(client, "/simulate", payload)
    out = Path(args.output_dir)
    _write(out, "trajectory.csv", data["trajectory_csv"])
    _write(out, "report.json", render_report(data["report"]))
    negatives = data["report"]["negative_entries"]
    note = f"; {len(negatives)} negative state entries" if negatives else ""
    print(f"simulated {data['report']['horizon_days']} days{note}")
    return EXIT_OK


def cmd_robustness(client, args) -> int:
    payload = {
        "spec": args.spec,
        "trajectory_csv": Path(args.trajectory).read_text(encoding="utf-8"),
        "at": args.at,
    }
    data = _post(client, "/robustness", payload)
    print(f"{data['robustness']:.9g}")
    return EXIT_OK if data["satisfied"] else EXIT_NEGATIVE


def cmd_serve(args) -> int:
    import uvicorn
    uvicorn.run("episynth.service:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="episynth",
        description="Robust epidemic-control synthesis under temporal specifications.")
    parser.add_argument("--server", default=None,
                        help="base URL of a running service (default: in-process)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed")
    parser.add_argument("--mode", choices=("natural", "centered"), default="centered",
                        help="inclusion mode for box propagation")
    parser.add_argument("--samples", type=int, default=200,
                        help="Monte-Carlo sample count for verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="synthesize a certified control")
    p.add_argument("scenario", help="scenario file path")
    p.add_argument("-o", "--output-dir", default=".", help="artifact directory")

    p = sub.add_parser("verify", help="verify a control against a scenario")
    p.add_argument("scenario", help="scenario file path")
    p.add_argument("-u", "--control", default=None, help="control CSV path (default: zero control)")
    p.add_argument("-o", "--output-dir", default=".", help="artifact directory")

    p = sub.add_parser("simulate", help="simulate the nominal dynamics")
    p.add_argument("scenario", help="scenario file path")
    group = p.add_mutually_exclusive_group()
    group.add_argument("-u", "--control", default=None, help="control CSV path")
    group.add_argument("--zero", action="store_true", help="use the all-zero control")
    p.add_argument("-o", "--output-dir", default=".", help="artifact directory")

    p = sub.add_parser("robustness", help="robustness of a trajectory CSV against a spec")
    p.add_argument("-s", "--spec", required=True, help="specification text")
    p.add_argument("-t", "--trajectory", required=True, help="trajectory CSV path")
    p.add_argument("--at", type=int, default=0, help="evaluation day index")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return cmd_serve(args)
    handlers = {
        "synthesize": cmd_synthesize,
        "verify": cmd_verify,
        "simulate": cmd_simulate,
        "robustness": cmd_robustness,
    }
    try:
        with _make_client(args.server) as client:
            return handlers[args.command](client, args)
    except (RuntimeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
