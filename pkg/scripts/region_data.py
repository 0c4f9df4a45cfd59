"""Write boundary samples and summary quantities of D_-inf for a set of (r, delta)."""
import argparse
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from imexstab import regions as R


@dataclass
class Config:
    orders: tuple[int, ...] = (1, 2, 3, 4, 5)
    deltas: tuple[float, ...] = (1.0, 0.5, 0.25, 0.1)
    samples: int = 512
    out: str = "region_data"


def main(cfg: Config) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for r in cfg.orders:
        for d in cfg.deltas:
            cur = R.exact_boundary(r, d, cfg.samples)
            np.savetxt(out / f"boundary_r{r}_d{d}.csv", np.column_stack([cur.points.real, cur.points.imag]),
                       delimiter=",", header="re,im", comments="")
            row = R.region_summary(r, d).as_dict()
            row["G"] = R.g_function(d, r) if r >= 2 else None
            summary.append(row)
            print(f"r={r} delta={d}: m_l={row['m_l']:.6g} m_r={row['m_r']:.6g}")
    (out / "summary.json").write_text(json.dumps({"config": asdict(cfg), "rows": summary}, indent=2))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="region_data")
    main(Config(out=ap.parse_args().out))
