"""Scalar splitting A = -1, B = -9: certificates and empirical growth across k."""
from dataclasses import dataclass

import numpy as np

from imexstab.problems import scalar_problem
from imexstab.schemes import build_scheme
from imexstab.splitting import certify, largest_stable_delta
from imexstab.stepping import empirical_stability


@dataclass
class Config:
    r: int = 5
    deltas: tuple[float, ...] = (1.0, 0.1, 0.05, 0.04)
    scan_step: float = 0.002
    k_grid: tuple[float, float, int] = (-3.0, 8.0, 12)


def main(cfg: Config) -> None:
    sp = scalar_problem(-1.0, -9.0).split
    ks = np.logspace(*cfg.k_grid)
    for d in cfg.deltas:
        verdict = certify(sp, cfg.r, d)
        rho = max(v.spectral_radius for v in empirical_stability(build_scheme(cfg.r, d), sp, ks))
        print(f"delta={d:<6} {verdict.status:<22} max spectral radius over k: {rho:.6f}")
    grid = np.round(np.arange(0.2, 0.0, -cfg.scan_step), 12)
    print("largest certified delta:", largest_stable_delta(sp, cfg.r, delta_grid=grid))


if __name__ == "__main__":
    main(Config())
