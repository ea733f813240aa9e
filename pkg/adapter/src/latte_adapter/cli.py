"""`latte-adapter serve` entry point."""

from __future__ import annotations

import argparse
import sys

import uvicorn

from .config import load_config
from .engines import build_engines
from .server import create_app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="latte-adapter")
    sub = parser.add_subparsers(dest="command", required=True)
    serve = sub.add_parser("serve", help="serve configured checkpoints over the wire protocol")
    serve.add_argument("--config", help="YAML config path (roles, device, sampling)")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    args = parser.parse_args(argv)

    config = load_config(args.config)
    if not config.configured_roles():
        print(
            "warning: no roles configured; every request will get a protocol error",
            file=sys.stderr,
        )
    app = create_app(build_engines(config))
    uvicorn.run(
        app,
        host=args.host or config.host,
        port=args.port or config.port,
        log_level="info",
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
