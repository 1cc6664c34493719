"""Graph verdicts versus data: d-separation against partial correlations.

Every d-separated pair should be (conditionally) uncorrelated in data drawn
from a matching linear structural model, and every d-connected pair should
show clearly nonzero correlation when coefficients are bounded away from
zero.  This ties the graph module to the sampler: one decides independence
symbolically, the other realizes it numerically.
"""

from proxymr import (
    concordance_config,
    d_separated,
    induced_dag,
    partial_correlation,
    sample_trio,
)

N = 400_000
CASES = [
    ("G", "A", ()),
    ("G", "Y", ("A",)),       # conditioning on a collider opens G .. U .. Y
    ("G", "Y_P", ()),
    ("G", "Y_P", ("A_P",)),   # the one proxy path, blocked at the exposure
    ("G", "U", ()),
    ("G", "U", ("A",)),
    ("G_P", "Y", ("G",)),
    ("A", "Y_P", ("G_P",)),
]

for graph in ("canonical", "vaccine"):
    cfg = concordance_config(graph, n=N, seed=5)
    dag = induced_dag(cfg)
    ds = sample_trio(cfg)
    print(f"== {graph} graph, n = {N:,}")
    for x, y, given in CASES:
        sep = d_separated(dag, x, y, given)
        rho = partial_correlation(
            ds.node_values(x), ds.node_values(y), [ds.node_values(z) for z in given]
        )
        cond = f" | {','.join(given)}" if given else ""
        print(f"  {x} _||_ {y}{cond}:  d-separated={str(sep):5s}  "
              f"partial corr = {rho:+.4f}")
    print()

print("Separated pairs sit at zero; connected pairs do not.  The vaccine")
print("graph flips the (G, Y_P | A_P) verdict because the auxiliary disease")
print("pathway bypasses the exposure.")
