from argparse import ArgumentParser

from cli.commands import auc, classify, compare, extract, kpca, matrix, sweep
from core.config import APP_NAME, APP_VERSION


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog=APP_NAME,
        description="Rigid-motion invariant similarity of labelled atom clouds (binding pockets)",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {APP_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    extract.register(subparsers)
    compare.register(subparsers)
    matrix.register(subparsers)
    auc.register(subparsers)
    classify.register(subparsers)
    kpca.register(subparsers)
    sweep.register(subparsers)
    return parser
