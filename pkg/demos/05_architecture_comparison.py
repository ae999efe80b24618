"""Whole-run operation budgets: bus architecture versus a spin-resonance one.

The reference machine needs (6/delta) N^4 elementary operations for a run at
precision delta; the bus totals grow as N^2 (general couplings) or N
(fixed-range).  The tables below locate the break-even size and the largest
systems a fixed budget covers, and audit every closed-form count against an
actually compiled sequence.
"""

import numpy as np

import qubusim as q
from qubusim.resources import CountFormula, formula_count, verify_counts

delta = 2 * np.pi / 2**10

print(f"{'N':>4} {'bus nearest-neighbour':>22} {'bus general':>14} {'reference':>12}")
for n in (4, 5, 10, 26, 72):
    nn = formula_count(CountFormula("qubus_nn", {"N": n, "delta": delta}))
    gen = q.total_ops_precision("general", n, delta)
    ref = formula_count(CountFormula("nmr", {"N": n, "delta": delta}))
    print(f"{n:>4} {nn:>22.3g} {gen:>14.3g} {ref:>12.3g}")

print("\nbreak-even system size (independent of delta):", q.crossover_n())
budget = 6e6
print(f"largest system within a {budget:.0e}-operation budget:")
print("  nearest-neighbour couplings:", q.max_n_for_budget("nn", budget, delta))
print("  general couplings:          ", q.max_n_for_budget("general", budget, delta))

print("\nformula-versus-compiler audit (dense instances, integer equality):")
report = verify_counts(n_range=range(2, 9), k_range=range(2, 9))
print(f"  rows checked: {len(report.rows)}, mismatches: {len(report.mismatches())}")
print("\nsample rows:")
for line in report.to_csv().splitlines()[:8]:
    print(" ", line)
