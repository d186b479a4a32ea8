"""
Synthetic dataset generator.

Writes a directory of cloud files with planted ligand classes (rigidly moved,
jittered copies of one template per class). Useful for smoke runs of the
matrix, auc, classify, kpca and sweep commands.
"""
import os
import sys
import argparse
import logging

# Add parent directory to path to import app modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from core.config import DEFAULT_SEED
from crud.cloud_crud import save_cloud
from utils.synthetic import planted_classes

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)


def write_dataset(out_dir, n_classes, per_class, n_atoms, jitter, labelled, seed):
    """
    Generate a planted-class dataset and write it to a directory.

    Args:
        out_dir (str): Output directory.
        n_classes (int): Number of classes.
        per_class (int): Clouds per class.
        n_atoms (int): Atoms per cloud.
        jitter (float): Coordinate noise in Angstrom.
        labelled (bool): Attach random charges.
        seed (int): Random seed.

    Returns:
        list: Written CSV paths.
    """
    clouds = planted_classes(
        n_classes, per_class, n_atoms=n_atoms, jitter=jitter, labelled=labelled, seed=seed
    )
    paths = [save_cloud(cloud, os.path.join(out_dir, f"{cloud.id}.csv"), source_file="synthetic")
             for cloud in clouds]
    logger.info(f"Wrote {len(paths)} clouds ({n_classes} classes) to {out_dir}")
    return paths


def main():
    parser = argparse.ArgumentParser(description='Write a synthetic cloud dataset with planted classes')
    parser.add_argument('out_dir', help='Output directory')
    parser.add_argument('--classes', type=int, default=10, help='Number of classes')
    parser.add_argument('--per-class', type=int, default=10, help='Clouds per class')
    parser.add_argument('--atoms', type=int, default=20, help='Atoms per cloud')
    parser.add_argument('--jitter', type=float, default=0.05, help='Coordinate noise in Angstrom')
    parser.add_argument('--labelled', action='store_true', help='Attach random partial charges')
    parser.add_argument('--seed', type=int, default=DEFAULT_SEED)

    args = parser.parse_args()
    write_dataset(args.out_dir, args.classes, args.per_class, args.atoms, args.jitter, args.labelled, args.seed)


if __name__ == '__main__':
    main()
