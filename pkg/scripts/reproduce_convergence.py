"""Temporal convergence of the variable-diffusion problem for r = 1..5."""
import argparse
from dataclasses import dataclass, field

from imexstab.problems import catalog_problem, convergence_study


@dataclass
class Config:
    delta: float = 0.12
    N: int = 100
    alpha: float = 2.5
    orders: tuple[int, ...] = (1, 2, 3, 4, 5)
    ks: list[float] = field(default_factory=lambda: [2.0**-j for j in range(6, 14)])
    t_final: float = 1.0


def main(cfg: Config) -> None:
    prob = catalog_problem("paper-vardiff", N=cfg.N, alpha=cfg.alpha)
    reports = {r: convergence_study(r, cfg.delta, prob, cfg.ks, cfg.t_final, reference_k=2 * cfg.ks[0]) for r in cfg.orders}
    print("k".ljust(12) + "".join(f"r={r} err   rate  " for r in cfg.orders))
    for i, k in enumerate(cfg.ks):
        cells = "".join(f"{reports[r].errors[i]:9.2e} {reports[r].rates[i]:5.2f}  " for r in cfg.orders)
        print(f"{k:<12.4e}{cells}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=100)
    ap.add_argument("--delta", type=float, default=0.12)
    args = ap.parse_args()
    main(Config(delta=args.delta, N=args.N))
