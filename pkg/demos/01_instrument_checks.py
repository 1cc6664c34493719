"""Graphical instrument checks on the two-generation graph.

Walks the built-in graph: the child's genotype G is a valid instrument for
the child exposure-outcome pair, the parent's genotype for the parent pair,
and G doubles as a valid but *non-causal* instrument for the parent pair.
Then breaks things: a parent-era-only disease pathway violates exclusion,
and the violation propagates to the child's genotype once inheritance is
prepended to the offending path.
"""

from proxymr import canonical_dag, check_instrument, enumerate_paths, get_scenario

dag = canonical_dag()

print("The canonical graph:")
print(dag.to_text())

print("Every path between the child genotype and the parent outcome:")
for path in enumerate_paths(dag, "G", "Y_P"):
    print(f"  {path}")
print()

for triple in [("G", "A", "Y"), ("G_P", "A_P", "Y_P"), ("G", "A_P", "Y_P")]:
    report = check_instrument(dag, *triple)
    print("\n".join(report.lines()))
    print()

print("Now the vaccine-era variant: the SNP also causes condition B_P,")
print("lethal for the parents but vaccinated away for the children.\n")
vaccine = get_scenario("vaccine_exclusion").dag
for triple in [("G_P", "A_P", "Y_P"), ("G", "A_P", "Y_P"), ("G", "A", "Y")]:
    report = check_instrument(vaccine, *triple)
    print("\n".join(report.lines()))
    print()

print("Note the second witness: it is the first one with G <- G_P prepended,")
print("which is why a parent-side violation always invalidates the child's")
print("genotype as a proxy instrument too.")
