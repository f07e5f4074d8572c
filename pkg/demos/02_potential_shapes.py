"""How the asymmetry a and the second width sigma2 reshape the Langevin potential."""

from nes.potential import PotentialFn
from nes.tables import potential_grid

print("sigma1 = 0.2, mu = +-0.4, h = 0.1\n")
for (a, s2), p in potential_grid().items():
    pot = PotentialFn(p)
    pts = ", ".join(f"{c.kind} {c.location:+.3f}" for c in pot.critical_points)
    side = pot.global_min_side()
    where = "wells level" if side == "symmetric" else f"{side} well lower"
    print(f"a={a:.1f} sigma2={s2:.1f}: {pot.shape():11}  {where:16} [{pts}]")
print("\nSmall a favours the right well, large a the left one; a = 0.5 with equal widths is symmetric.")
