"""Shared argument handling for the reproduction scripts."""

from __future__ import annotations

import argparse
import sys

from rankinfer.simlab import emit


def parser(description: str, R: int = 2000, B: int = 500) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--R", type=int, default=R, help="Monte Carlo replications")
    p.add_argument("--B", type=int, default=B, help="bootstrap draws per replication")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default=None, help="write here instead of stdout")
    return p


def write(obj, args) -> None:
    data = emit(obj, args.format, path=args.output)
    if args.output is None:
        sys.stdout.buffer.write(data)
