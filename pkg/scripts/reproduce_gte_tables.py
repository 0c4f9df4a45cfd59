"""Final-time error of u' = -u as delta shrinks, at fixed k and at k = delta/5."""
from dataclasses import dataclass

from imexstab.problems import gte_study, scalar_problem


@dataclass
class Config:
    orders: tuple[int, ...] = (1, 2, 3)
    fixed_k: float = 1e-3
    fixed_k_levels: int = 7
    k_over_delta: float = 0.2
    proportional_levels: int = 11


def table(title, reports, deltas):
    print(title)
    print("delta".ljust(12) + "".join(f"r={r} error  rate   " for r in reports))
    for i, d in enumerate(deltas):
        print(f"{d:<12.4e}" + "".join(f"{rep.errors[i]:10.3e} {rep.rates[i]:6.2f}  " for rep in reports.values()))
    print()


def main(cfg: Config) -> None:
    prob = scalar_problem(-1.0, 0.0)
    ds = [2.0**-j for j in range(cfg.fixed_k_levels)]
    table(f"fixed k = {cfg.fixed_k}", {r: gte_study(r, ds, prob, k=cfg.fixed_k) for r in cfg.orders}, ds)
    ds = [2.0**-j for j in range(cfg.proportional_levels)]
    table(f"k = {cfg.k_over_delta} delta", {r: gte_study(r, ds, prob, k_over_delta=cfg.k_over_delta) for r in cfg.orders}, ds)


if __name__ == "__main__":
    main(Config())
