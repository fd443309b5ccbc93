"""Generate a 50-customer map, solve it, verify the result and draw it.

    python3 demos/quickstart.py [out_dir]
"""
import sys
from pathlib import Path

from fstsp.evaluation import check_feasible, evaluate
from fstsp.instance import GeneratorParams, generate
from fstsp.plot import render_svg
from fstsp.search import SearchConfig, hgvns

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

inst = generate(GeneratorParams("ponza", 50, rng_seed=1))
print(f"{inst.name}: {inst.n - 1} customers, {int(inst.eligible.sum())} drone-eligible, "
      f"endurance {inst.endurance} min")

rep = hgvns(inst, seed_strategy="heuristic", config=SearchConfig(rng_seed=0))
print(f"truck-only tour   {rep.s_tsp_cost:8.2f} min")
print(f"after savings     {rep.initial_cost:8.2f} min")
print(f"after search      {rep.final_cost:8.2f} min  ({rep.gap_pct:+.2f}%)")
print("moves applied:", {k: v for k, v in rep.move_counts.items() if v})

sol = rep.solution
assert check_feasible(sol, inst) == []
tl = evaluate(sol, inst)
for i, s in enumerate(sol.sorties):
    print(f"  sortie {s.launch:>2} -> {s.visit:>2} -> {s.return_:>2}: "
          f"airborne {tl.endurance_used[i]:5.2f} min, truck waits {tl.wait_truck[i]:4.2f} min")

(out / "route.svg").write_text(render_svg(inst, sol))
print("wrote", out / "route.svg")
